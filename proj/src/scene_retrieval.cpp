#include "vismap/scene_retrieval.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <set>

namespace vismap {

SceneClassifier::SceneClassifier(std::vector<SceneGallery> galleries, const DescriptorStore& store)
    : galleries_(std::move(galleries)) {
    if (galleries_.size() < 2) {
        throw ConfigError("scene classifier needs at least 2 galleries, got " +
                          std::to_string(galleries_.size()));
    }
    std::set<std::string> names;
    for (const auto& g : galleries_) {
        g.validate();
        if (!names.insert(g.class_name).second) {
            throw ConfigError("duplicate scene gallery '" + g.class_name + "'");
        }
    }
    for (const auto& g : galleries_) {
        std::string missing;
        for (const auto& m : g.members) {
            if (!store.contains(m)) {
                missing += " (" + m.traversal + ", " + std::to_string(m.index) + ")";
            }
        }
        if (!missing.empty()) {
            throw ConfigError("scene gallery '" + g.class_name + "' has unresolvable members:" + missing);
        }
        const std::size_t dim = store.row(g.members.front()).size();
        if (dim_ == 0) {
            dim_ = dim;
        }
        DescriptorMatrix rows(g.members.size(), dim);
        for (std::size_t i = 0; i < g.members.size(); ++i) {
            auto src = store.row(g.members[i]);
            if (src.size() != dim_) {
                throw ConfigError("scene gallery '" + g.class_name + "' mixes descriptor dims " +
                                  std::to_string(src.size()) + " and " + std::to_string(dim_));
            }
            std::copy(src.begin(), src.end(), rows.row(i).begin());
        }
        resolved_.push_back({g.class_name, std::move(rows)});
    }
    std::sort(resolved_.begin(), resolved_.end(),
              [](const Resolved& a, const Resolved& b) { return a.name < b.name; });
}

bool SceneClassifier::has_class(std::string_view name) const {
    return std::any_of(resolved_.begin(), resolved_.end(),
                       [&](const Resolved& r) { return r.name == name; });
}

Classification SceneClassifier::classify(std::span<const float> query) const {
    if (query.size() != dim_) {
        throw Error("query descriptor dimension mismatch: " + std::to_string(query.size()) +
                    " vs classifier " + std::to_string(dim_));
    }
    Classification out;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : resolved_) {
        double sum = 0.0;
        for (std::size_t i = 0; i < g.rows.count(); ++i) {
            sum += euclidean_distance(query, g.rows.row(i));
        }
        const double mean = sum / static_cast<double>(g.rows.count());
        out.per_class_scores.emplace(g.name, mean);
        // resolved_ is name-sorted, so strict < keeps the smallest name on ties.
        if (mean < best) {
            best = mean;
            out.class_name = g.name;
        }
    }
    out.confidence = best;
    return out;
}

std::vector<Classification> classify_frames(const Traversal& t, std::span<const std::size_t> frames,
                                            const SceneClassifier& classifier) {
    std::vector<Classification> out(frames.size());
    std::exception_ptr failure;
    std::size_t failed_at = frames.size();
    const auto n = static_cast<std::ptrdiff_t>(frames.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            out[k] = classifier.classify(t.descriptor(frames[k]));
        } catch (const std::exception& e) {
#pragma omp critical(vismap_classify_failure)
            if (static_cast<std::size_t>(k) < failed_at) {
                failed_at = static_cast<std::size_t>(k);
                failure = std::make_exception_ptr(
                    Error("frame " + std::to_string(frames[k]) + ": " + e.what()));
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

std::vector<Classification> classify_traversal(const Traversal& t, const SceneClassifier& classifier) {
    std::vector<std::size_t> all(t.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return classify_frames(t, all, classifier);
}

namespace reference {

std::vector<Classification> classify_traversal(const Traversal& t, const SceneClassifier& classifier) {
    std::vector<Classification> out;
    out.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        try {
            out.push_back(classifier.classify(t.descriptor(i)));
        } catch (const std::exception& e) {
            throw Error("frame " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

} // namespace reference

} // namespace vismap
