#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "vismap/core.hpp"

namespace vismap {

struct Classification {
    std::string class_name;
    /// Mean gallery distance of the winning class. Lower is more confident.
    double confidence = 0.0;
    std::map<std::string, double> per_class_scores;

    bool is_undefined() const { return class_name == kUndefinedLabel; }
    bool operator==(const Classification&) const = default;
};

/// Test-time scene classifier: a query belongs to the class whose gallery has
/// the smallest mean Euclidean distance to it. Ties go to the lexicographically
/// smallest class name. Gallery rows are copied at construction, so the store
/// only has to live until the constructor returns.
class SceneClassifier {
  public:
    SceneClassifier(std::vector<SceneGallery> galleries, const DescriptorStore& store);

    Classification classify(std::span<const float> query) const;

    const std::vector<SceneGallery>& galleries() const noexcept { return galleries_; }
    std::size_t dim() const noexcept { return dim_; }
    bool has_class(std::string_view name) const;

  private:
    struct Resolved {
        std::string name;
        DescriptorMatrix rows;
    };
    std::vector<SceneGallery> galleries_;
    std::vector<Resolved> resolved_; // sorted by class name
    std::size_t dim_ = 0;
};

/// One Classification per frame, in frame order. Frames are classified in
/// parallel; errors carry the offending frame index.
std::vector<Classification> classify_traversal(const Traversal& t, const SceneClassifier& classifier);

/// Classifies only `frames` (parallel); result i belongs to frames[i].
std::vector<Classification> classify_frames(const Traversal& t, std::span<const std::size_t> frames,
                                            const SceneClassifier& classifier);

namespace reference {
/// Single-threaded classify_traversal, kept as the oracle for the parallel kernel.
std::vector<Classification> classify_traversal(const Traversal& t, const SceneClassifier& classifier);
} // namespace reference

} // namespace vismap
