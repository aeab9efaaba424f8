#include "vismap/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

namespace vismap {

double position_distance(const Position& a, const Position& b) {
    if (a.index() != b.index()) {
        throw Error("cannot measure distance between a route position and a planar position");
    }
    if (const auto* ra = std::get_if<double>(&a)) {
        return std::abs(*ra - std::get<double>(b));
    }
    const auto& pa = std::get<PlanarPoint>(a);
    const auto& pb = std::get<PlanarPoint>(b);
    return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

DescriptorMatrix::DescriptorMatrix(std::size_t count, std::size_t dim)
    : count_(count), dim_(dim), values_(count * dim, 0.0f) {}

DescriptorMatrix::DescriptorMatrix(std::size_t count, std::size_t dim, std::vector<float> values)
    : count_(count), dim_(dim), values_(std::move(values)) {
    if (values_.size() != count_ * dim_) {
        std::ostringstream os;
        os << "descriptor payload has " << values_.size() << " values, expected " << count_
           << " x " << dim_;
        throw Error(os.str());
    }
}

std::span<const float> DescriptorMatrix::row(std::size_t i) const {
    if (i >= count_) {
        throw Error("descriptor row " + std::to_string(i) + " out of range (count " +
                    std::to_string(count_) + ")");
    }
    return std::span<const float>(values_).subspan(i * dim_, dim_);
}

std::span<float> DescriptorMatrix::row(std::size_t i) {
    if (i >= count_) {
        throw Error("descriptor row " + std::to_string(i) + " out of range (count " +
                    std::to_string(count_) + ")");
    }
    return std::span<float>(values_).subspan(i * dim_, dim_);
}

bool DescriptorMatrix::operator==(const DescriptorMatrix& other) const {
    return count_ == other.count_ && dim_ == other.dim_ &&
           (values_.empty() ||
            std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(float)) == 0);
}

bool Traversal::planar() const {
    return !frames.empty() && std::holds_alternative<PlanarPoint>(frames.front().position);
}

void Traversal::validate() const {
    if (descriptors.count() != frames.size()) {
        throw Error("traversal '" + name + "': " + std::to_string(frames.size()) +
                    " frames but " + std::to_string(descriptors.count()) + " descriptor rows");
    }
    if (!frames.empty() && descriptors.dim() == 0) {
        throw Error("traversal '" + name + "': descriptor dim must be >= 1");
    }
    std::set<std::string_view> ids;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Frame& f = frames[i];
        const std::string where = "traversal '" + name + "' frame " + std::to_string(i);
        if (f.index != i) {
            throw Error(where + ": index " + std::to_string(f.index) + " out of sequence");
        }
        if (!ids.insert(f.id).second) {
            throw Error(where + ": duplicate id '" + f.id + "'");
        }
        if (f.position.index() != frames.front().position.index()) {
            throw Error(where + ": mixes route and planar positions");
        }
        if (i > 0 && !planar() &&
            std::get<double>(f.position) < std::get<double>(frames[i - 1].position)) {
            throw Error(where + ": route position decreases");
        }
        if (f.memorability && !(*f.memorability >= 0.0 && *f.memorability <= 1.0)) {
            throw Error(where + ": memorability outside [0,1]");
        }
    }
    for (float v : descriptors.values()) {
        if (!std::isfinite(v)) {
            throw Error("traversal '" + name + "': non-finite descriptor value");
        }
    }
}

std::vector<double> travelled_distance(const Traversal& t) {
    std::vector<double> out(t.size(), 0.0);
    if (t.frames.empty()) {
        return out;
    }
    if (!t.planar()) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            out[i] = std::get<double>(t.frames[i].position);
        }
        return out;
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        out[i] = out[i - 1] + position_distance(t.frames[i - 1].position, t.frames[i].position);
    }
    return out;
}

void SceneGallery::validate() const {
    if (class_name.empty()) {
        throw ConfigError("scene gallery with empty class name");
    }
    if (members.empty()) {
        throw ConfigError("scene gallery '" + class_name + "' has no members");
    }
    std::set<RowRef> seen;
    for (const auto& m : members) {
        if (!seen.insert(m).second) {
            throw ConfigError("scene gallery '" + class_name + "' references (" + m.traversal +
                              ", " + std::to_string(m.index) + ") twice");
        }
    }
}

void DescriptorStore::add(const Traversal& t) {
    traversals_.insert_or_assign(t.name, std::cref(t));
}

bool DescriptorStore::contains(const RowRef& ref) const {
    auto it = traversals_.find(ref.traversal);
    return it != traversals_.end() && ref.index < it->second.get().size();
}

std::span<const float> DescriptorStore::row(const RowRef& ref) const {
    auto it = traversals_.find(ref.traversal);
    if (it == traversals_.end() || ref.index >= it->second.get().size()) {
        throw Error("unresolvable descriptor reference (" + ref.traversal + ", " +
                    std::to_string(ref.index) + ")");
    }
    return it->second.get().descriptor(ref.index);
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw Error("descriptor dimension mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

double mean_gallery_distance(std::span<const float> query, const SceneGallery& gallery,
                             const DescriptorStore& store) {
    if (gallery.members.empty()) {
        throw ConfigError("scene gallery '" + gallery.class_name + "' has no members");
    }
    std::vector<const RowRef*> missing;
    for (const auto& m : gallery.members) {
        if (!store.contains(m)) {
            missing.push_back(&m);
        }
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << "scene gallery '" << gallery.class_name << "' has unresolvable members:";
        for (const auto* m : missing) {
            os << " (" << m->traversal << ", " << m->index << ")";
        }
        throw Error(os.str());
    }
    double sum = 0.0;
    for (const auto& m : gallery.members) {
        sum += euclidean_distance(query, store.row(m));
    }
    return sum / static_cast<double>(gallery.members.size());
}

} // namespace vismap
