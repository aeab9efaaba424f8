#include "vismap/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

namespace vismap {

FoldSpec make_folds(const Traversal& t, std::size_t fold_count) {
    if (fold_count < 2) throw ConfigError("fold count must be >= 2");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (const auto& f : t.frames) by_class[f.label].push_back(f.index);

    FoldSpec spec;
    spec.fold_count = fold_count;
    for (const auto& [name, frames] : by_class) {
        if (frames.size() < fold_count) {
            throw ConfigError("class '" + name + "' has " + std::to_string(frames.size()) +
                              " frames, too few to split into " + std::to_string(fold_count) + " folds");
        }
        auto& sections = spec.sections[name];
        const std::size_t n = frames.size();
        for (std::size_t k = 0; k < fold_count; ++k) {
            sections.emplace_back(frames.begin() + static_cast<std::ptrdiff_t>(k * n / fold_count),
                                  frames.begin() + static_cast<std::ptrdiff_t>((k + 1) * n / fold_count));
        }
    }
    return spec;
}

std::vector<std::string> predict_with_galleries(const Traversal& t, const std::vector<SceneGallery>& galleries,
                                                std::span<const std::size_t> test_frames) {
    DescriptorStore store(t);
    SceneClassifier classifier(galleries, store);
    auto cls = classify_frames(t, test_frames, classifier);
    std::vector<std::string> out;
    out.reserve(cls.size());
    for (auto& c : cls) out.push_back(std::move(c.class_name));
    return out;
}

ClassificationEvalReport run_classification_eval(const Traversal& t, const FoldSpec& folds,
                                                 const FoldPredictor& predictor) {
    ClassificationEvalReport report;
    report.fold_count = folds.fold_count;
    report.reference_uses.assign(t.size(), 0);
    report.test_uses.assign(t.size(), 0);

    std::vector<bool> covered(t.size(), false);
    for (const auto& [name, sections] : folds.sections) {
        if (sections.size() != folds.fold_count) {
            throw ConfigError("class '" + name + "' has " + std::to_string(sections.size()) +
                              " sections, expected " + std::to_string(folds.fold_count));
        }
        for (const auto& s : sections) {
            if (s.empty()) throw ConfigError("class '" + name + "' has an empty fold section");
            for (std::size_t i : s) {
                if (i >= t.size()) throw ConfigError("fold section index out of range");
                covered[i] = true;
            }
        }
    }

    std::map<std::string, std::vector<double>> per_fold;
    for (std::size_t k = 0; k < folds.fold_count; ++k) {
        std::vector<SceneGallery> galleries;
        std::vector<bool> is_ref(t.size(), false);
        for (const auto& [name, sections] : folds.sections) {
            SceneGallery g{name, {}};
            for (std::size_t i : sections[k]) {
                g.members.push_back({t.name, i});
                is_ref[i] = true;
                ++report.reference_uses[i];
            }
            galleries.push_back(std::move(g));
        }
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (covered[i] && !is_ref[i]) {
                test.push_back(i);
                ++report.test_uses[i];
            }
        }
        const auto predicted = predictor(t, galleries, test);
        if (predicted.size() != test.size()) {
            throw Error("predictor returned " + std::to_string(predicted.size()) + " labels for " +
                        std::to_string(test.size()) + " test frames");
        }
        std::map<std::string, std::pair<std::size_t, std::size_t>> tally; // correct, total
        for (std::size_t j = 0; j < test.size(); ++j) {
            auto& [correct, total] = tally[t.frames[test[j]].label];
            ++total;
            correct += predicted[j] == t.frames[test[j]].label ? 1 : 0;
        }
        for (const auto& [name, ct] : tally) {
            per_fold[name].push_back(100.0 * static_cast<double>(ct.first) / static_cast<double>(ct.second));
        }
    }

    double scene_sum = 0.0;
    std::size_t scene_classes = 0;
    for (const auto& [name, accs] : per_fold) {
        const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
        report.class_accuracy[name] = mean;
        if (name == kUndefinedLabel) {
            report.undefined_accuracy = mean;
        } else {
            scene_sum += mean;
            ++scene_classes;
        }
    }
    report.scene_average = scene_classes ? scene_sum / static_cast<double>(scene_classes) : 0.0;
    return report;
}

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::distance: return "distance";
    case Strategy::memorability: return "memorability";
    case Strategy::context: return "context";
    case Strategy::dmc: return "dmc";
    }
    return "distance";
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "distance") return Strategy::distance;
    if (s == "memorability") return Strategy::memorability;
    if (s == "context") return Strategy::context;
    if (s == "dmc") return Strategy::dmc;
    throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

ReferenceSplit select_references(const Traversal& t, double scene_fraction, double undefined_fraction,
                                 std::uint64_t seed) {
    if (!(scene_fraction > 0.0 && scene_fraction < 1.0) ||
        !(undefined_fraction > 0.0 && undefined_fraction < 1.0)) {
        throw ConfigError("reference fractions must lie in (0,1)");
    }
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (const auto& f : t.frames) by_class[f.label].push_back(f.index);

    std::mt19937_64 rng(seed);
    ReferenceSplit split;
    for (auto& [name, frames] : by_class) {
        const double fraction = name == kUndefinedLabel ? undefined_fraction : scene_fraction;
        const auto take = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(frames.size()))));
        if (take >= frames.size()) {
            throw ConfigError("class '" + name + "' is too small to hold out references and still map it");
        }
        std::shuffle(frames.begin(), frames.end(), rng);
        std::vector<std::size_t> chosen(frames.begin(), frames.begin() + static_cast<std::ptrdiff_t>(take));
        std::sort(chosen.begin(), chosen.end());
        SceneGallery g{name, {}};
        for (std::size_t i : chosen) {
            g.members.push_back({t.name, i});
            split.excluded.push_back(i);
        }
        split.galleries.push_back(std::move(g));
    }
    std::sort(split.excluded.begin(), split.excluded.end());
    return split;
}

void ExperimentConfig::validate() const {
    if (strategies.empty()) throw ConfigError("experiment needs at least one strategy");
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) {
            throw ConfigError("fraction point " + std::to_string(f) + " outside [0,1]");
        }
    }
    if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) {
        throw ConfigError("budget_fraction must lie in (0,1]");
    }
    sampler.validate();
}

MappingExperiment::MappingExperiment(const Traversal& t, ExperimentConfig cfg) : t_(t), cfg_(std::move(cfg)) {
    cfg_.validate();
    refs_ = select_references(t_, cfg_.reference_scene_fraction, cfg_.reference_undefined_fraction, cfg_.seed);
    cfg_.sampler.excluded_indices = refs_.excluded;
    cfg_.sampler.budget_fraction = cfg_.budget_fraction;
    DescriptorStore store(t_);
    SceneClassifier classifier(refs_.galleries, store);
    classifications_ = classify_traversal(t_, classifier);
    if (cfg_.auto_threshold_s) {
        cfg_.sampler.threshold_s = label_calibrated_threshold(t_, classifications_, refs_.excluded);
    }
    budget_ = budget_target(t_, cfg_.budget_fraction, refs_.excluded);
}

std::vector<MapEntry> MappingExperiment::ranked_admissions(Strategy s) const {
    const auto& excluded = refs_.excluded;
    switch (s) {
    case Strategy::distance:
        return {};
    case Strategy::memorability: {
        auto entries = sample_memorability(t_, cfg_.sampler.threshold_mem, excluded).entries;
        std::stable_sort(entries.begin(), entries.end(), [&](const MapEntry& a, const MapEntry& b) {
            return *t_.frames[a.index].memorability > *t_.frames[b.index].memorability;
        });
        return entries;
    }
    case Strategy::context: {
        auto entries = sample_contextual(t_, classifications_, cfg_.sampler.threshold_s, excluded).entries;
        std::stable_sort(entries.begin(), entries.end(), [&](const MapEntry& a, const MapEntry& b) {
            return classifications_[a.index].confidence < classifications_[b.index].confidence;
        });
        return entries;
    }
    case Strategy::dmc:
        return sample_dmc(t_, classifications_, cfg_.sampler).entries;
    }
    return {};
}

VisualMap MappingExperiment::build(Strategy s, double fraction) const {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw ConfigError("fraction point " + std::to_string(fraction) + " outside [0,1]");
    }
    VisualMap map{t_.name, {}};
    if (s != Strategy::distance && fraction > 0.0) {
        auto ranked = ranked_admissions(s);
        const auto k = std::min(ranked.size(), static_cast<std::size_t>(std::llround(
                                                   fraction * static_cast<double>(budget_))));
        map.entries.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(map.entries.begin(), map.entries.end(),
                  [](const MapEntry& a, const MapEntry& b) { return a.index < b.index; });
    }

    const std::size_t sourced = map.size();
    if (sourced >= budget_) return map;
    const std::size_t fill_target = budget_ - sourced;

    std::vector<std::size_t> fill_excluded = refs_.excluded;
    for (const auto& e : map.entries) fill_excluded.push_back(e.index);
    const auto travelled = travelled_distance(t_);
    const double length = t_.size() > 1 ? travelled.back() - travelled.front() : 0.0;
    const double interval = length > 0.0 ? length / static_cast<double>(fill_target) : 1.0;
    auto fill = sample_distance(t_, interval, fill_excluded);
    fill = enforce_budget(fill, t_, fill_target, fill_excluded).map;

    map.entries.insert(map.entries.end(), fill.entries.begin(), fill.entries.end());
    std::sort(map.entries.begin(), map.entries.end(),
              [](const MapEntry& a, const MapEntry& b) { return a.index < b.index; });
    return map;
}

double label_calibrated_threshold(const Traversal& t, std::span<const Classification> classifications,
                                  std::span<const std::size_t> excluded) {
    if (classifications.size() != t.size()) throw ConfigError("classification count does not match traversal");
    const auto skip = exclusion_mask(t, excluded);
    double own_sum = 0.0, other_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Frame& f = t.frames[i];
        if (skip[i] || !f.is_scene()) continue;
        const auto& scores = classifications[i].per_class_scores;
        auto own = scores.find(f.label);
        if (own == scores.end()) continue;
        double other = std::numeric_limits<double>::infinity();
        for (const auto& [name, v] : scores) {
            if (name != f.label) other = std::min(other, v);
        }
        if (!std::isfinite(other)) continue;
        own_sum += own->second;
        other_sum += other;
        ++n;
    }
    if (n == 0) throw ConfigError("no labelled scene frames to calibrate threshold_s from");
    return 0.5 * (own_sum + other_sum) / static_cast<double>(n);
}

double scene_inclusion_pct(const VisualMap& map, const Traversal& t, std::span<const std::size_t> excluded) {
    const auto skip = exclusion_mask(t, excluded);
    std::size_t available = 0, included = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (skip[i] || !t.frames[i].is_scene()) continue;
        ++available;
        included += map.contains(i) ? 1 : 0;
    }
    return available ? 100.0 * static_cast<double>(included) / static_cast<double>(available) : 0.0;
}

CoverageReport run_coverage_experiment(const Traversal& t, const ExperimentConfig& cfg) {
    MappingExperiment exp(t, cfg);
    CoverageReport report;
    report.seed = cfg.seed;
    report.budget_fraction = cfg.budget_fraction;
    report.budget = exp.budget();
    report.reference_frames = exp.references().excluded.size();

    const auto skip = exclusion_mask(t, exp.references().excluded);
    for (Strategy s : cfg.strategies) {
        const auto ranked_size = exp.ranked_admissions(s).size();
        for (double f : cfg.fractions) {
            const VisualMap map = exp.build(s, f);
            CoveragePoint p;
            p.strategy = s;
            p.fraction = f;
            p.map_size = map.size();
            p.sourced = s == Strategy::distance || f == 0.0
                            ? 0
                            : std::min(ranked_size, static_cast<std::size_t>(std::llround(
                                                        f * static_cast<double>(exp.budget()))));
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (skip[i] || !t.frames[i].is_scene()) continue;
                ++p.scene_available;
                p.scene_included += map.contains(i) ? 1 : 0;
            }
            p.inclusion_pct = p.scene_available ? 100.0 * static_cast<double>(p.scene_included) /
                                                      static_cast<double>(p.scene_available)
                                                : 0.0;
            report.points.push_back(p);
        }
    }
    return report;
}

LocalizationExperimentReport run_localization_experiment(const Traversal& map_traversal,
                                                         std::span<const Traversal> query_traversals,
                                                         const ExperimentConfig& cfg,
                                                         const LocalizationConfig& loc_cfg) {
    if (query_traversals.empty()) throw ConfigError("localization experiment needs >= 1 query traversal");
    loc_cfg.validate();
    MappingExperiment exp(map_traversal, cfg);

    std::vector<std::size_t> query_excluded;
    if (cfg.exclude_reference_queries) {
        for (const auto& q : query_traversals) {
            if (q.size() != map_traversal.size()) {
                throw ConfigError("query traversal '" + q.name +
                                  "' is not index-aligned with the map traversal; disable "
                                  "exclude_reference_queries for unaligned data");
            }
        }
        query_excluded = exp.references().excluded;
    }

    LocalizationExperimentReport report;
    report.seed = cfg.seed;
    report.budget = exp.budget();
    auto evaluate = [&](const VisualMap& map) {
        LocalizationMap lm(map, map_traversal);
        std::vector<LocalizationReport> out;
        for (const auto& q : query_traversals) {
            out.push_back(evaluate_localization(q, lm, loc_cfg, query_excluded));
        }
        return out;
    };

    const auto baseline = evaluate(exp.build(Strategy::distance, 0.0));
    for (std::size_t q = 0; q < query_traversals.size(); ++q) {
        report.query_traversals.push_back(query_traversals[q].name);
        report.baseline_scene.push_back(baseline[q].accuracy_scene);
        report.baseline_undefined.push_back(baseline[q].accuracy_undefined);
    }

    for (Strategy s : cfg.strategies) {
        for (double f : cfg.fractions) {
            LocalizationCell cell;
            cell.strategy = s;
            cell.fraction = f;
            const auto reports = evaluate(exp.build(s, f));
            double scene_rel = 0.0, undef_rel = 0.0;
            bool scene_rel_ok = true, undef_rel_ok = true;
            for (std::size_t q = 0; q < reports.size(); ++q) {
                const auto d = accuracy_delta(reports[q], baseline[q]);
                cell.accuracy_scene.push_back(reports[q].accuracy_scene);
                cell.accuracy_undefined.push_back(reports[q].accuracy_undefined);
                cell.deltas.push_back(d);
                cell.mean_delta.scene_points += d.scene_points;
                cell.mean_delta.undefined_points += d.undefined_points;
                scene_rel_ok = scene_rel_ok && d.scene_relative_pct.has_value();
                undef_rel_ok = undef_rel_ok && d.undefined_relative_pct.has_value();
                scene_rel += d.scene_relative_pct.value_or(0.0);
                undef_rel += d.undefined_relative_pct.value_or(0.0);
            }
            const auto n = static_cast<double>(reports.size());
            cell.mean_delta.scene_points /= n;
            cell.mean_delta.undefined_points /= n;
            if (scene_rel_ok) cell.mean_delta.scene_relative_pct = scene_rel / n;
            if (undef_rel_ok) cell.mean_delta.undefined_relative_pct = undef_rel / n;
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

} // namespace vismap
