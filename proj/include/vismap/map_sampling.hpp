#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vismap/core.hpp"
#include "vismap/scene_retrieval.hpp"

namespace vismap {

/// Which rule admitted a frame into a visual map.
enum class Provenance { distance, memorability, context, dist_max_fallback };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct MapEntry {
    std::size_t index = 0;
    Provenance provenance = Provenance::distance;
    bool operator==(const MapEntry&) const = default;
};

/// Ordered subset of a traversal's frames. Entries are strictly increasing by index.
struct VisualMap {
    std::string traversal_name;
    std::vector<MapEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
    bool empty() const noexcept { return entries.empty(); }
    bool contains(std::size_t index) const;
    std::vector<std::size_t> indices() const;
    bool operator==(const VisualMap&) const = default;
};

struct SamplerConfig {
    double dist_interval_m = 10.0;
    double threshold_mem = 0.5;
    /// Confidence threshold in descriptor-distance units; admission needs a
    /// biased score strictly below it.
    double threshold_s = std::numeric_limits<double>::infinity();
    double b_mem = -0.2;
    double dist_min_m = 10.0;
    double dist_max_m = 50.0;
    std::optional<double> budget_fraction;
    /// Frames held out as gallery references; never admitted to a map.
    std::vector<std::size_t> excluded_indices;

    void validate() const;
};

/// First non-excluded frame, then every frame at least `interval_m` of travel
/// past the last selected one.
VisualMap sample_distance(const Traversal& t, double interval_m,
                          std::span<const std::size_t> excluded = {});

/// Frames with memorability strictly above `threshold_mem`. Every non-excluded
/// frame must carry a memorability score.
VisualMap sample_memorability(const Traversal& t, double threshold_mem,
                              std::span<const std::size_t> excluded = {});

/// Frames not classified "undefined" whose confidence (a distance) is
/// strictly below `threshold_s`.
VisualMap sample_contextual(const Traversal& t, std::span<const Classification> classifications,
                            double threshold_s, std::span<const std::size_t> excluded = {});
VisualMap sample_contextual(const Traversal& t, const SceneClassifier& classifier, double threshold_s,
                            std::span<const std::size_t> excluded = {});

/// Distance, memorability and context sampling in one forward pass. For each
/// remaining frame, with Dist_m the travel since the last admission (infinite
/// before the first one) and the confidence biased by memorability:
///
///   classified "undefined"                    -> discard
///   biased score < threshold_s                -> admit (context)
///   Dist_m > dist_min and mem > threshold_mem -> admit (memorability)
///   Dist_m > dist_max                         -> admit (dist_max_fallback)
///   otherwise                                 -> discard
///
/// Classification may be precomputed (in parallel); the ladder itself is sequential.
VisualMap sample_dmc(const Traversal& t, std::span<const Classification> classifications,
                     const SamplerConfig& config);
VisualMap sample_dmc(const Traversal& t, const SceneClassifier& classifier, const SamplerConfig& config);

struct BudgetResult {
    VisualMap map;
    std::vector<std::string> warnings;
};

/// round(fraction * number of non-excluded frames).
std::size_t budget_target(const Traversal& t, double fraction, std::span<const std::size_t> excluded);

/// Trims or pads `map` to exactly `target` frames (or to every available frame
/// if fewer exist).
///
/// Trimming drops non-context frames first, dist_max_fallback before
/// memorability before distance; within a tier the frame closest to a retained
/// neighbour goes first (lower index on ties). Context frames are dropped only
/// when they alone exceed the budget, oldest first, with a warning.
///
/// Padding repeatedly adds the unselected frame farthest (in travelled
/// distance) from every selected frame, i.e. the middle of the widest gap;
/// an empty map is seeded at the middle of the route. Added frames carry
/// distance provenance.
BudgetResult enforce_budget(const VisualMap& map, const Traversal& t, std::size_t target,
                            std::span<const std::size_t> excluded = {});

/// Uses config.budget_fraction and config.excluded_indices.
BudgetResult enforce_budget(const VisualMap& map, const Traversal& t, const SamplerConfig& config);

/// Mask of size t.size(); throws ConfigError on out-of-range indices.
std::vector<bool> exclusion_mask(const Traversal& t, std::span<const std::size_t> excluded);

} // namespace vismap
