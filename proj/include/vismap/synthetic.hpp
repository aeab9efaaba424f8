#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vismap/core.hpp"

namespace vismap {

struct SyntheticClass {
    std::string name;
    std::uint64_t mean_seed = 0;
};

/// Desk-scale stand-in for a route dataset.
///
/// Frames are laid out along a 1-D route at `spacing_m`. Each scene class
/// occupies `runs_per_class` contiguous runs scattered between stretches of
/// "undefined" frames. Cluster means point along mutually orthogonal
/// directions at distance `separation * sigma` from the origin, so distinct
/// means are sqrt(2) * separation * sigma apart (all equal when separation
/// is 0). A frame's descriptor is
///
///   mean(label) + sigma * place + sigma * appearance_noise * noise
///
/// where `place` is a unit-variance AR(1) process along the route shared by
/// every traversal generated from the same `seed`, and `noise` is fresh per
/// `noise_seed`. Two specs differing only in noise_seed therefore describe
/// two passes through the same world.
struct SyntheticSpec {
    std::string name = "synthetic";
    std::vector<SyntheticClass> classes;
    std::size_t frames_per_class = 50;
    std::size_t runs_per_class = 1;
    std::size_t undefined_frames = 200;
    std::size_t undefined_clusters = 1;
    std::size_t dim = 16;
    double sigma = 1.0;
    double separation = 5.0;
    double place_correlation = 0.9;
    double appearance_noise = 0.25;
    double spacing_m = 10.0;
    double memorability_alpha = 2.0;
    double memorability_beta = 2.0;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> noise_seed;

    void validate() const;
    std::size_t frame_count() const;
};

/// `count` classes named class0.. with mean seeds derived from `seed`.
std::vector<SyntheticClass> default_classes(std::size_t count, std::uint64_t seed = 7);

/// Deterministic for a fixed spec.
Traversal generate_synthetic(const SyntheticSpec& spec);

/// Cluster means in the order: classes..., then undefined clusters.
std::vector<std::vector<double>> synthetic_cluster_means(const SyntheticSpec& spec);

} // namespace vismap
