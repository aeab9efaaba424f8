#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vismap/error.hpp"

namespace vismap {

inline constexpr std::string_view kUndefinedLabel = "undefined";

struct PlanarPoint {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const PlanarPoint&) const = default;
};

/// Route distance in metres (1-D) or planar coordinates in metres (2-D).
/// A traversal uses exactly one of the two.
using Position = std::variant<double, PlanarPoint>;

/// |a - b| for route positions, Euclidean distance on the plane otherwise.
/// Throws Error when the two positions are of different kinds.
double position_distance(const Position& a, const Position& b);

struct Frame {
    std::string id;
    std::size_t index = 0;
    Position position;
    std::optional<double> timestamp_s;
    std::string label;
    std::optional<double> memorability;

    bool is_scene() const { return label != kUndefinedLabel; }
    bool operator==(const Frame&) const = default;
};

/// Dense row-major count x dim matrix of 32-bit floats; row i belongs to frame i.
class DescriptorMatrix {
  public:
    DescriptorMatrix() = default;
    DescriptorMatrix(std::size_t count, std::size_t dim);
    DescriptorMatrix(std::size_t count, std::size_t dim, std::vector<float> values);

    std::size_t count() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return count_ == 0; }

    std::span<const float> row(std::size_t i) const;
    std::span<float> row(std::size_t i);
    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }

    /// Bitwise comparison of shape and payload.
    bool operator==(const DescriptorMatrix& other) const;

  private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> values_;
};

struct Traversal {
    std::string name;
    std::vector<Frame> frames;
    DescriptorMatrix descriptors;

    std::size_t size() const noexcept { return frames.size(); }
    std::span<const float> descriptor(std::size_t i) const { return descriptors.row(i); }
    bool planar() const;

    /// Checks index alignment, position kinds, route monotonicity, memorability
    /// range and descriptor finiteness. Throws Error describing the first violation.
    void validate() const;

    bool operator==(const Traversal&) const = default;
};

/// Distance travelled from the first frame, per frame. For route positions this
/// is the route value itself so differences stay exact; planar traversals
/// accumulate segment lengths.
std::vector<double> travelled_distance(const Traversal& t);

struct RowRef {
    std::string traversal;
    std::size_t index = 0;
    auto operator<=>(const RowRef&) const = default;
};

struct SceneGallery {
    std::string class_name;
    std::vector<RowRef> members;

    /// Non-empty name, non-empty member list, no duplicate references.
    void validate() const;
};

/// Read-only lookup of descriptor rows by (traversal name, frame index).
/// Holds references; registered traversals must outlive the store.
class DescriptorStore {
  public:
    DescriptorStore() = default;
    explicit DescriptorStore(const Traversal& t) { add(t); }

    void add(const Traversal& t);
    bool contains(const RowRef& ref) const;
    std::span<const float> row(const RowRef& ref) const;

  private:
    std::map<std::string, std::reference_wrapper<const Traversal>, std::less<>> traversals_;
};

/// L2 norm of (a - b), accumulated in double precision.
double euclidean_distance(std::span<const float> a, std::span<const float> b);

/// Arithmetic mean of euclidean_distance(query, member) over the gallery.
/// Throws Error listing every member the store cannot resolve.
double mean_gallery_distance(std::span<const float> query, const SceneGallery& gallery,
                             const DescriptorStore& store);

} // namespace vismap
