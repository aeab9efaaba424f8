#include "vismap/map_sampling.hpp"

#include <algorithm>
#include <cmath>

#include "vismap/frame_scoring.hpp"

namespace vismap {

std::string_view to_string(Provenance p) {
    switch (p) {
    case Provenance::distance: return "distance";
    case Provenance::memorability: return "memorability";
    case Provenance::context: return "context";
    case Provenance::dist_max_fallback: return "dist_max_fallback";
    }
    return "distance";
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "distance") return Provenance::distance;
    if (s == "memorability") return Provenance::memorability;
    if (s == "context") return Provenance::context;
    if (s == "dist_max_fallback") return Provenance::dist_max_fallback;
    throw ConfigError("unknown provenance '" + std::string(s) + "'");
}

bool VisualMap::contains(std::size_t index) const {
    return std::binary_search(entries.begin(), entries.end(), MapEntry{index, Provenance::distance},
                              [](const MapEntry& a, const MapEntry& b) { return a.index < b.index; });
}

std::vector<std::size_t> VisualMap::indices() const {
    std::vector<std::size_t> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.index);
    return out;
}

void SamplerConfig::validate() const {
    if (!(dist_interval_m > 0.0)) throw ConfigError("dist_interval_m must be > 0");
    if (!(threshold_mem >= 0.0 && threshold_mem <= 1.0)) {
        throw ConfigError("threshold_mem must lie in [0,1]");
    }
    if (std::isnan(threshold_s)) throw ConfigError("threshold_s must not be NaN");
    if (!std::isfinite(b_mem)) throw ConfigError("b_mem must be finite");
    if (!(dist_min_m >= 0.0 && dist_min_m < dist_max_m)) {
        throw ConfigError("need 0 <= dist_min_m < dist_max_m");
    }
    if (budget_fraction && !(*budget_fraction > 0.0 && *budget_fraction <= 1.0)) {
        throw ConfigError("budget_fraction must lie in (0,1]");
    }
}

std::vector<bool> exclusion_mask(const Traversal& t, std::span<const std::size_t> excluded) {
    std::vector<bool> mask(t.size(), false);
    for (std::size_t i : excluded) {
        if (i >= t.size()) {
            throw ConfigError("excluded index " + std::to_string(i) + " outside traversal of " +
                              std::to_string(t.size()) + " frames");
        }
        mask[i] = true;
    }
    return mask;
}

namespace {

void require_memorability(const Traversal& t, const std::vector<bool>& skip) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!skip[i] && !t.frames[i].memorability) {
            throw ConfigError("traversal '" + t.name + "' frame " + std::to_string(i) +
                              " has no memorability score; this sampler requires one per frame");
        }
    }
}

void require_classifications(const Traversal& t, std::span<const Classification> c) {
    if (c.size() != t.size()) {
        throw ConfigError("got " + std::to_string(c.size()) + " classifications for " +
                          std::to_string(t.size()) + " frames");
    }
}

} // namespace

VisualMap sample_distance(const Traversal& t, double interval_m, std::span<const std::size_t> excluded) {
    if (!(interval_m > 0.0)) throw ConfigError("distance interval must be > 0");
    const auto skip = exclusion_mask(t, excluded);
    const auto travelled = travelled_distance(t);
    VisualMap map{t.name, {}};
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (skip[i]) continue;
        if (!last || travelled[i] - travelled[*last] >= interval_m) {
            map.entries.push_back({i, Provenance::distance});
            last = i;
        }
    }
    return map;
}

VisualMap sample_memorability(const Traversal& t, double threshold_mem,
                              std::span<const std::size_t> excluded) {
    if (!(threshold_mem >= 0.0 && threshold_mem <= 1.0)) {
        throw ConfigError("threshold_mem must lie in [0,1]");
    }
    const auto skip = exclusion_mask(t, excluded);
    require_memorability(t, skip);
    VisualMap map{t.name, {}};
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!skip[i] && *t.frames[i].memorability > threshold_mem) {
            map.entries.push_back({i, Provenance::memorability});
        }
    }
    return map;
}

VisualMap sample_contextual(const Traversal& t, std::span<const Classification> classifications,
                            double threshold_s, std::span<const std::size_t> excluded) {
    require_classifications(t, classifications);
    const auto skip = exclusion_mask(t, excluded);
    VisualMap map{t.name, {}};
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& c = classifications[i];
        if (!skip[i] && !c.is_undefined() && c.confidence < threshold_s) {
            map.entries.push_back({i, Provenance::context});
        }
    }
    return map;
}

VisualMap sample_contextual(const Traversal& t, const SceneClassifier& classifier, double threshold_s,
                            std::span<const std::size_t> excluded) {
    return sample_contextual(t, classify_traversal(t, classifier), threshold_s, excluded);
}

VisualMap sample_dmc(const Traversal& t, std::span<const Classification> classifications,
                     const SamplerConfig& config) {
    config.validate();
    require_classifications(t, classifications);
    const auto skip = exclusion_mask(t, config.excluded_indices);
    require_memorability(t, skip);
    const auto travelled = travelled_distance(t);

    VisualMap map{t.name, {}};
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (skip[i]) continue;
        const double moved = last ? travelled[i] - travelled[*last]
                                  : std::numeric_limits<double>::infinity();
        const double mem = *t.frames[i].memorability;
        const Classification& c = classifications[i];
        const double score = biased_confidence(c.confidence, mem, config.b_mem);

        std::optional<Provenance> admit;
        if (c.is_undefined()) {
            continue;
        } else if (score < config.threshold_s) {
            admit = Provenance::context;
        } else if (moved > config.dist_min_m && mem > config.threshold_mem) {
            admit = Provenance::memorability;
        } else if (moved > config.dist_max_m) {
            admit = Provenance::dist_max_fallback;
        }
        if (admit) {
            map.entries.push_back({i, *admit});
            last = i;
        }
    }
    return map;
}

VisualMap sample_dmc(const Traversal& t, const SceneClassifier& classifier, const SamplerConfig& config) {
    return sample_dmc(t, classify_traversal(t, classifier), config);
}

std::size_t budget_target(const Traversal& t, double fraction, std::span<const std::size_t> excluded) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("budget fraction must lie in (0,1]");
    const auto skip = exclusion_mask(t, excluded);
    const auto available = static_cast<double>(std::count(skip.begin(), skip.end(), false));
    return static_cast<std::size_t>(std::llround(fraction * available));
}

namespace {

int drop_tier(Provenance p) {
    switch (p) {
    case Provenance::dist_max_fallback: return 0;
    case Provenance::memorability: return 1;
    case Provenance::distance: return 2;
    case Provenance::context: return 3;
    }
    return 3;
}

} // namespace

BudgetResult enforce_budget(const VisualMap& map, const Traversal& t, std::size_t target,
                            std::span<const std::size_t> excluded) {
    const auto skip = exclusion_mask(t, excluded);
    const auto travelled = travelled_distance(t);
    BudgetResult out{map, {}};
    auto& entries = out.map.entries;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].index >= t.size() || skip[entries[k].index] ||
            (k > 0 && entries[k].index <= entries[k - 1].index)) {
            throw ConfigError("visual map entries must be increasing, in range and not excluded");
        }
    }

    const auto context_count = static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(), [](const MapEntry& e) { return e.provenance == Provenance::context; }));
    if (context_count > target) {
        out.warnings.push_back("budget of " + std::to_string(target) + " frames is below the " +
                               std::to_string(context_count) +
                               " context admissions; dropping oldest context frames");
    }

    while (entries.size() > target) {
        int tier = 3;
        for (const auto& e : entries) tier = std::min(tier, drop_tier(e.provenance));
        std::size_t victim = 0; // only context frames left: oldest first
        if (tier < 3) {
            double best_gap = std::numeric_limits<double>::infinity();
            bool found = false;
            for (std::size_t k = 0; k < entries.size(); ++k) {
                if (drop_tier(entries[k].provenance) != tier) continue;
                const double here = travelled[entries[k].index];
                double gap = std::numeric_limits<double>::infinity();
                if (k > 0) gap = std::min(gap, here - travelled[entries[k - 1].index]);
                if (k + 1 < entries.size()) gap = std::min(gap, travelled[entries[k + 1].index] - here);
                if (!found || gap < best_gap) {
                    best_gap = gap;
                    victim = k;
                    found = true;
                }
            }
        }
        entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    if (entries.size() < target) {
        std::vector<bool> taken(t.size(), false);
        for (const auto& e : entries) taken[e.index] = true;
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!skip[i] && !taken[i]) candidates.push_back(i);
        }
        // reach[c]: travelled distance from candidate c to the nearest selected frame.
        std::vector<double> reach(candidates.size(), std::numeric_limits<double>::infinity());
        auto add = [&](std::size_t c) {
            const std::size_t frame = candidates[c];
            taken[frame] = true;
            for (std::size_t o = 0; o < candidates.size(); ++o) {
                reach[o] = std::min(reach[o], std::abs(travelled[candidates[o]] - travelled[frame]));
            }
            auto pos = std::lower_bound(entries.begin(), entries.end(), frame,
                                        [](const MapEntry& e, std::size_t f) { return e.index < f; });
            entries.insert(pos, {frame, Provenance::distance});
        };
        for (const auto& e : entries) {
            for (std::size_t o = 0; o < candidates.size(); ++o) {
                reach[o] = std::min(reach[o], std::abs(travelled[candidates[o]] - travelled[e.index]));
            }
        }
        if (entries.empty() && !candidates.empty()) {
            const double mid = 0.5 * (travelled[candidates.front()] + travelled[candidates.back()]);
            std::size_t best = 0;
            for (std::size_t c = 1; c < candidates.size(); ++c) {
                if (std::abs(travelled[candidates[c]] - mid) < std::abs(travelled[candidates[best]] - mid)) {
                    best = c;
                }
            }
            add(best);
        }
        while (entries.size() < target) {
            std::size_t best = candidates.size();
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (taken[candidates[c]]) continue;
                if (best == candidates.size() || reach[c] > reach[best]) best = c;
            }
            if (best == candidates.size()) break;
            add(best);
        }
    }
    return out;
}

BudgetResult enforce_budget(const VisualMap& map, const Traversal& t, const SamplerConfig& config) {
    config.validate();
    if (!config.budget_fraction) throw ConfigError("budget_fraction is not set");
    return enforce_budget(map, t, budget_target(t, *config.budget_fraction, config.excluded_indices),
                          config.excluded_indices);
}

} // namespace vismap
