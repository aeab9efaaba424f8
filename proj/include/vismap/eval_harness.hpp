#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vismap/core.hpp"
#include "vismap/localization.hpp"
#include "vismap/map_sampling.hpp"
#include "vismap/scene_retrieval.hpp"

namespace vismap {

// ---------------------------------------------------------------------------
// Scene classification, k-fold with sequential sections

/// Per class (including "undefined" when present), the class's frames in index
/// order cut into fold_count equal sequential sections. Fold k uses section k
/// of every class as gallery references and every other frame as test data.
struct FoldSpec {
    std::size_t fold_count = 4;
    std::map<std::string, std::vector<std::vector<std::size_t>>> sections;
};

/// Throws ConfigError naming any class with fewer than fold_count frames.
FoldSpec make_folds(const Traversal& t, std::size_t fold_count = 4);

/// Predicts a label for each of `test_frames` given the fold's galleries.
using FoldPredictor = std::function<std::vector<std::string>(
    const Traversal&, const std::vector<SceneGallery>&, std::span<const std::size_t>)>;

/// Default predictor: mean-distance scene retrieval against the galleries.
std::vector<std::string> predict_with_galleries(const Traversal& t, const std::vector<SceneGallery>& galleries,
                                                std::span<const std::size_t> test_frames);

struct ClassificationEvalReport {
    std::size_t fold_count = 0;
    /// Percent correct per class, averaged over folds. Includes "undefined" if present.
    std::map<std::string, double> class_accuracy;
    /// Mean over scene classes only.
    double scene_average = 0.0;
    std::optional<double> undefined_accuracy;
    /// Per frame: how many folds used it as a reference / as a test item.
    std::vector<std::size_t> reference_uses;
    std::vector<std::size_t> test_uses;
};

ClassificationEvalReport run_classification_eval(const Traversal& t, const FoldSpec& folds,
                                                 const FoldPredictor& predictor = predict_with_galleries);

// ---------------------------------------------------------------------------
// Map coverage and localization experiments

enum class Strategy { distance, memorability, context, dmc };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

/// Randomly chosen gallery reference frames, removed from map candidacy.
struct ReferenceSplit {
    std::vector<SceneGallery> galleries;
    std::vector<std::size_t> excluded; // sorted
};

/// Picks round(scene_fraction * n) frames (at least one) of every scene class
/// and round(undefined_fraction * n) undefined frames (at least one when any
/// exist) as references. Deterministic for a seed.
ReferenceSplit select_references(const Traversal& t, double scene_fraction, double undefined_fraction,
                                 std::uint64_t seed);

struct ExperimentConfig {
    std::vector<Strategy> strategies{Strategy::distance, Strategy::memorability, Strategy::context,
                                     Strategy::dmc};
    std::vector<double> fractions{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    double budget_fraction = 0.5;
    double reference_scene_fraction = 0.25;
    double reference_undefined_fraction = 0.10;
    /// Thresholds for the memorability, context and DMC strategies. Its
    /// excluded_indices and budget_fraction are ignored (set from the above).
    SamplerConfig sampler;
    /// Drop gallery reference frames from localization queries. Requires query
    /// traversals index-aligned with the map traversal.
    bool exclude_reference_queries = true;
    /// Replace sampler.threshold_s with label_calibrated_threshold() once the
    /// references are chosen.
    bool auto_threshold_s = false;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Builds fixed-budget hybrid maps over one traversal: a fraction of the
/// budget comes from a strategy's best-ranked admissions and the rest from
/// distance-interval sampling over the frames still unselected.
///
/// Ranking: memorability by score (high first), context by confidence
/// distance (low first), DMC in admission order. The budget is
/// budget_fraction of the frames left after removing references.
class MappingExperiment {
  public:
    MappingExperiment(const Traversal& t, ExperimentConfig cfg);

    const Traversal& traversal() const noexcept { return t_; }
    const ExperimentConfig& config() const noexcept { return cfg_; }
    const ReferenceSplit& references() const noexcept { return refs_; }
    const std::vector<Classification>& classifications() const noexcept { return classifications_; }
    std::size_t budget() const noexcept { return budget_; }

    /// The strategy's admissions in ranking order (empty for distance).
    std::vector<MapEntry> ranked_admissions(Strategy s) const;

    /// Hybrid map with exactly min(budget, available) frames.
    VisualMap build(Strategy s, double fraction) const;

  private:
    const Traversal& t_;
    ExperimentConfig cfg_;
    ReferenceSplit refs_;
    std::vector<Classification> classifications_;
    std::size_t budget_ = 0;
};

/// Midpoint between the mean own-class score and the mean best other-class
/// score of the non-excluded scene frames. Uses ground-truth labels, so it is
/// an experiment calibration, not something a deployed mapper can do.
double label_calibrated_threshold(const Traversal& t, std::span<const Classification> classifications,
                                  std::span<const std::size_t> excluded);

/// Percentage of non-excluded scene frames present in the map.
double scene_inclusion_pct(const VisualMap& map, const Traversal& t, std::span<const std::size_t> excluded);

struct CoveragePoint {
    Strategy strategy = Strategy::distance;
    double fraction = 0.0;
    std::size_t map_size = 0;
    std::size_t sourced = 0; // frames taken from the strategy's ranking
    std::size_t scene_included = 0;
    std::size_t scene_available = 0;
    double inclusion_pct = 0.0;
};

struct CoverageReport {
    std::uint64_t seed = 0;
    double budget_fraction = 0.0;
    std::size_t budget = 0;
    std::size_t reference_frames = 0;
    std::vector<CoveragePoint> points;
};

CoverageReport run_coverage_experiment(const Traversal& t, const ExperimentConfig& cfg);

struct LocalizationCell {
    Strategy strategy = Strategy::distance;
    double fraction = 0.0;
    std::vector<double> accuracy_scene;     // per query traversal
    std::vector<double> accuracy_undefined; // per query traversal
    std::vector<AccuracyDelta> deltas;      // per query traversal, vs the distance map
    AccuracyDelta mean_delta;               // relative parts present only if present for all
};

struct LocalizationExperimentReport {
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::vector<std::string> query_traversals;
    std::vector<double> baseline_scene;
    std::vector<double> baseline_undefined;
    std::vector<LocalizationCell> cells;
};

LocalizationExperimentReport run_localization_experiment(const Traversal& map_traversal,
                                                         std::span<const Traversal> query_traversals,
                                                         const ExperimentConfig& cfg,
                                                         const LocalizationConfig& loc_cfg);

} // namespace vismap
