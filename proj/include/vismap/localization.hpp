#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vismap/core.hpp"
#include "vismap/map_sampling.hpp"

namespace vismap {

/// Exactly one of window_frames / window_m is set.
struct LocalizationConfig {
    std::optional<std::size_t> window_frames = 100;
    std::optional<double> window_m;
    double correct_tol_m = 25.0;

    void validate() const;
};

/// A visual map resolved against its traversal: positions and a private copy
/// of the selected descriptors.
class LocalizationMap {
  public:
    LocalizationMap(const VisualMap& map, const Traversal& t);

    std::size_t size() const noexcept { return frames_.size(); }
    std::size_t dim() const noexcept { return descriptors_.dim(); }
    std::size_t frame_index(std::size_t k) const { return frames_[k]; }
    const Position& position(std::size_t k) const { return positions_[k]; }
    std::span<const float> descriptor(std::size_t k) const { return descriptors_.row(k); }

  private:
    std::vector<std::size_t> frames_;
    std::vector<Position> positions_;
    DescriptorMatrix descriptors_;
};

/// Windowed nearest-neighbour retrieval. The candidate window holds the
/// window_frames map frames nearest the query's ground-truth position (ties to
/// lower index) or every map frame within window_m. Returns the traversal index
/// of the candidate with the smallest descriptor distance (lowest index on
/// ties), or nullopt when the window is empty (out of coverage).
std::optional<std::size_t> localize(const Position& query_position, std::span<const float> query_descriptor,
                                    const LocalizationMap& map, const LocalizationConfig& cfg);

struct QueryOutcome {
    std::size_t query_index = 0;
    std::optional<std::size_t> retrieved;
    bool correct = false;
    bool scene = false;
    bool operator==(const QueryOutcome&) const = default;
};

/// Accuracy change against a baseline report. Points are this - baseline in
/// percentage points; relative is (this - baseline) / baseline * 100 and is
/// absent when the baseline accuracy is 0.
struct AccuracyDelta {
    double scene_points = 0.0;
    double undefined_points = 0.0;
    std::optional<double> scene_relative_pct;
    std::optional<double> undefined_relative_pct;
    bool operator==(const AccuracyDelta&) const = default;
};

struct LocalizationReport {
    std::vector<QueryOutcome> queries;
    std::size_t scene_queries = 0;
    std::size_t scene_correct = 0;
    std::size_t undefined_queries = 0;
    std::size_t undefined_correct = 0;
    /// Percentages in [0,100]; 0 when the category has no queries.
    double accuracy_scene = 0.0;
    double accuracy_undefined = 0.0;
    std::optional<AccuracyDelta> delta;
    bool operator==(const LocalizationReport&) const = default;
};

AccuracyDelta accuracy_delta(const LocalizationReport& report, const LocalizationReport& baseline);

/// Localizes every query frame not listed in `excluded_queries` (gallery
/// references). Correct when the retrieved frame lies within correct_tol_m of
/// the query's ground truth. Queries run in parallel.
LocalizationReport evaluate_localization(const Traversal& queries, const LocalizationMap& map,
                                         const LocalizationConfig& cfg,
                                         std::span<const std::size_t> excluded_queries = {});

namespace reference {
/// Brute-force window selection (full sort) and single-threaded evaluation.
std::optional<std::size_t> localize(const Position& query_position, std::span<const float> query_descriptor,
                                    const LocalizationMap& map, const LocalizationConfig& cfg);
LocalizationReport evaluate_localization(const Traversal& queries, const LocalizationMap& map,
                                         const LocalizationConfig& cfg,
                                         std::span<const std::size_t> excluded_queries = {});
} // namespace reference

} // namespace vismap
