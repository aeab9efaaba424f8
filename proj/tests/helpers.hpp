#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vismap/core.hpp"
#include "vismap/synthetic.hpp"

namespace vismap::test {

struct FrameSpec {
    double route_m;
    std::string label;
    std::optional<double> memorability;
    std::vector<float> descriptor;
};

inline Traversal make_traversal(const std::string& name, const std::vector<FrameSpec>& spec) {
    Traversal t;
    t.name = name;
    const std::size_t dim = spec.empty() ? 1 : spec.front().descriptor.size();
    t.descriptors = DescriptorMatrix(spec.size(), dim);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        Frame f;
        f.id = name + "_" + std::to_string(i);
        f.index = i;
        f.position = spec[i].route_m;
        f.label = spec[i].label;
        f.memorability = spec[i].memorability;
        t.frames.push_back(f);
        auto row = t.descriptors.row(i);
        for (std::size_t d = 0; d < dim; ++d) row[d] = spec[i].descriptor[d];
    }
    return t;
}

/// Evenly spaced frames, all "undefined", constant memorability, 1-D descriptor = index.
inline Traversal line_traversal(std::size_t n, double spacing = 10.0, double mem = 0.5) {
    std::vector<FrameSpec> spec;
    for (std::size_t i = 0; i < n; ++i) {
        spec.push_back({spacing * static_cast<double>(i), "undefined", mem, {static_cast<float>(i)}});
    }
    return make_traversal("line", spec);
}

inline SyntheticSpec small_spec(std::uint64_t seed, std::size_t classes = 4) {
    SyntheticSpec s;
    s.classes = default_classes(classes, seed * 31 + 5);
    s.frames_per_class = 40;
    s.runs_per_class = 2;
    s.undefined_frames = 240;
    s.dim = 16;
    s.seed = seed;
    return s;
}

} // namespace vismap::test
