#include "vismap/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace vismap {

void LocalizationConfig::validate() const {
    if (window_frames.has_value() == window_m.has_value()) {
        throw ConfigError("set exactly one of window_frames and window_m");
    }
    if (window_frames && *window_frames == 0) throw ConfigError("window_frames must be > 0");
    if (window_m && !(*window_m > 0.0)) throw ConfigError("window_m must be > 0");
    if (!(correct_tol_m > 0.0)) throw ConfigError("correct_tol_m must be > 0");
}

LocalizationMap::LocalizationMap(const VisualMap& map, const Traversal& t)
    : descriptors_(map.size(), t.descriptors.dim()) {
    frames_.reserve(map.size());
    positions_.reserve(map.size());
    for (std::size_t k = 0; k < map.size(); ++k) {
        const std::size_t i = map.entries[k].index;
        if (i >= t.size()) {
            throw ConfigError("map frame " + std::to_string(i) + " outside traversal '" + t.name + "'");
        }
        frames_.push_back(i);
        positions_.push_back(t.frames[i].position);
        auto src = t.descriptor(i);
        std::copy(src.begin(), src.end(), descriptors_.row(k).begin());
    }
}

namespace {

using Candidate = std::pair<double, std::size_t>; // (position distance, map slot)

std::optional<std::size_t> best_match(std::span<const Candidate> window, std::span<const float> query,
                                      const LocalizationMap& map) {
    std::optional<std::size_t> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [unused, k] : window) {
        const double d = euclidean_distance(query, map.descriptor(k));
        // Map slots are ordered by traversal index, so the lower slot wins ties.
        if (!best || d < best_dist || (d == best_dist && k < *best)) {
            best = k;
            best_dist = d;
        }
    }
    if (!best) return std::nullopt;
    return map.frame_index(*best);
}

void check_inputs(const LocalizationMap& map, std::span<const float> query) {
    if (map.size() == 0) throw ConfigError("cannot localize against an empty map");
    if (query.size() != map.dim()) {
        throw Error("query descriptor dimension mismatch: " + std::to_string(query.size()) +
                    " vs map " + std::to_string(map.dim()));
    }
}

std::vector<Candidate> all_candidates(const Position& query_position, const LocalizationMap& map) {
    std::vector<Candidate> c(map.size());
    for (std::size_t k = 0; k < map.size(); ++k) {
        c[k] = {position_distance(query_position, map.position(k)), k};
    }
    return c;
}

} // namespace

std::optional<std::size_t> localize(const Position& query_position, std::span<const float> query_descriptor,
                                    const LocalizationMap& map, const LocalizationConfig& cfg) {
    check_inputs(map, query_descriptor);
    auto c = all_candidates(query_position, map);
    if (cfg.window_frames) {
        const std::size_t w = std::min(*cfg.window_frames, c.size());
        std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(w), c.end());
        c.resize(w);
    } else {
        std::erase_if(c, [&](const Candidate& x) { return x.first > *cfg.window_m; });
    }
    return best_match(c, query_descriptor, map);
}

namespace {

template <typename Localize>
LocalizationReport evaluate_with(const Traversal& queries, const LocalizationMap& map,
                                 const LocalizationConfig& cfg, std::span<const std::size_t> excluded,
                                 bool parallel, Localize&& locate) {
    cfg.validate();
    if (map.size() == 0) throw ConfigError("cannot localize against an empty map");
    if (queries.size() > 0 && queries.descriptors.dim() != map.dim()) {
        throw Error("query traversal '" + queries.name + "' has descriptor dim " +
                    std::to_string(queries.descriptors.dim()) + ", map has " + std::to_string(map.dim()));
    }
    std::vector<bool> skip(queries.size(), false);
    for (std::size_t i : excluded) {
        if (i < queries.size()) skip[i] = true;
    }
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (!skip[i]) active.push_back(i);
    }

    LocalizationReport report;
    report.queries.resize(active.size());
    const auto n = static_cast<std::ptrdiff_t>(active.size());
#pragma omp parallel for schedule(dynamic, 32) if (parallel)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const std::size_t i = active[k];
        const Frame& f = queries.frames[i];
        QueryOutcome q;
        q.query_index = i;
        q.scene = f.is_scene();
        q.retrieved = locate(f.position, queries.descriptor(i), map, cfg);
        if (q.retrieved) {
            // Map slot lookup by traversal index; positions were copied in order.
            std::size_t lo = 0, hi = map.size();
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (map.frame_index(mid) < *q.retrieved) lo = mid + 1; else hi = mid;
            }
            q.correct = position_distance(map.position(lo), f.position) <= cfg.correct_tol_m;
        }
        report.queries[k] = q;
    }

    for (const auto& q : report.queries) {
        if (q.scene) {
            ++report.scene_queries;
            report.scene_correct += q.correct ? 1 : 0;
        } else {
            ++report.undefined_queries;
            report.undefined_correct += q.correct ? 1 : 0;
        }
    }
    auto pct = [](std::size_t hit, std::size_t total) {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(total);
    };
    report.accuracy_scene = pct(report.scene_correct, report.scene_queries);
    report.accuracy_undefined = pct(report.undefined_correct, report.undefined_queries);
    return report;
}

} // namespace

LocalizationReport evaluate_localization(const Traversal& queries, const LocalizationMap& map,
                                         const LocalizationConfig& cfg,
                                         std::span<const std::size_t> excluded_queries) {
    return evaluate_with(queries, map, cfg, excluded_queries, true,
                         [](const Position& p, std::span<const float> d, const LocalizationMap& m,
                            const LocalizationConfig& c) { return localize(p, d, m, c); });
}

AccuracyDelta accuracy_delta(const LocalizationReport& report, const LocalizationReport& baseline) {
    AccuracyDelta d;
    d.scene_points = report.accuracy_scene - baseline.accuracy_scene;
    d.undefined_points = report.accuracy_undefined - baseline.accuracy_undefined;
    if (baseline.accuracy_scene > 0.0) {
        d.scene_relative_pct = 100.0 * d.scene_points / baseline.accuracy_scene;
    }
    if (baseline.accuracy_undefined > 0.0) {
        d.undefined_relative_pct = 100.0 * d.undefined_points / baseline.accuracy_undefined;
    }
    return d;
}

namespace reference {

std::optional<std::size_t> localize(const Position& query_position, std::span<const float> query_descriptor,
                                    const LocalizationMap& map, const LocalizationConfig& cfg) {
    check_inputs(map, query_descriptor);
    auto c = all_candidates(query_position, map);
    std::sort(c.begin(), c.end());
    std::vector<Candidate> window;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const bool inside = cfg.window_frames ? k < *cfg.window_frames : c[k].first <= *cfg.window_m;
        if (inside) window.push_back(c[k]);
    }
    std::optional<std::size_t> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& [unused, k] : window) {
        const double d = euclidean_distance(query_descriptor, map.descriptor(k));
        if (!best || d < best_dist || (d == best_dist && k < *best)) {
            best = k;
            best_dist = d;
        }
    }
    if (!best) return std::nullopt;
    return map.frame_index(*best);
}

LocalizationReport evaluate_localization(const Traversal& queries, const LocalizationMap& map,
                                         const LocalizationConfig& cfg,
                                         std::span<const std::size_t> excluded_queries) {
    return evaluate_with(queries, map, cfg, excluded_queries, false,
                         [](const Position& p, std::span<const float> d, const LocalizationMap& m,
                            const LocalizationConfig& c) { return reference::localize(p, d, m, c); });
}

} // namespace reference

} // namespace vismap
