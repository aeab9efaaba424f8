#include "vismap/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vismap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Independent RNG streams derived from one seed.
enum Stream : std::uint64_t { kLayout = 1, kPlace = 2, kMemorability = 3, kNoise = 4, kUndefinedMean = 100 };

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v) x = n(rng);
    return v;
}

} // namespace

void SyntheticSpec::validate() const {
    if (classes.empty()) throw ConfigError("synthetic spec needs at least one scene class");
    for (const auto& c : classes) {
        if (c.name.empty() || c.name == kUndefinedLabel) {
            throw ConfigError("synthetic class name must be non-empty and not 'undefined'");
        }
    }
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = i + 1; j < classes.size(); ++j) {
            if (classes[i].name == classes[j].name) {
                throw ConfigError("duplicate synthetic class '" + classes[i].name + "'");
            }
        }
    }
    if (!(sigma > 0.0)) throw ConfigError("synthetic sigma must be > 0");
    if (!(spacing_m > 0.0)) throw ConfigError("synthetic spacing_m must be > 0");
    if (!(separation >= 0.0)) throw ConfigError("synthetic separation must be >= 0");
    if (!(place_correlation >= 0.0 && place_correlation < 1.0)) {
        throw ConfigError("synthetic place_correlation must lie in [0,1)");
    }
    if (!(appearance_noise >= 0.0)) throw ConfigError("synthetic appearance_noise must be >= 0");
    if (!(memorability_alpha > 0.0 && memorability_beta > 0.0)) {
        throw ConfigError("synthetic memorability alpha/beta must be > 0");
    }
    if (frames_per_class == 0) throw ConfigError("synthetic frames_per_class must be >= 1");
    if (runs_per_class == 0 || runs_per_class > frames_per_class) {
        throw ConfigError("synthetic runs_per_class must lie in [1, frames_per_class]");
    }
    if (undefined_frames > 0 && undefined_clusters == 0) {
        throw ConfigError("synthetic undefined_clusters must be >= 1 when undefined frames exist");
    }
    const std::size_t clusters = classes.size() + (undefined_frames > 0 ? undefined_clusters : 0);
    if (dim < clusters) {
        throw ConfigError("synthetic dim (" + std::to_string(dim) +
                          ") must be >= number of clusters (" + std::to_string(clusters) + ")");
    }
}

std::size_t SyntheticSpec::frame_count() const {
    return classes.size() * frames_per_class + undefined_frames;
}

std::vector<SyntheticClass> default_classes(std::size_t count, std::uint64_t seed) {
    std::vector<SyntheticClass> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back({"class" + std::to_string(i), splitmix64(seed + i)});
    }
    return out;
}

std::vector<std::vector<double>> synthetic_cluster_means(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t undefined = spec.undefined_frames > 0 ? spec.undefined_clusters : 0;
    std::vector<std::vector<double>> basis;
    for (std::size_t k = 0; k < spec.classes.size() + undefined; ++k) {
        auto rng = k < spec.classes.size()
                       ? std::mt19937_64(splitmix64(spec.classes[k].mean_seed))
                       : stream_rng(spec.seed, kUndefinedMean + (k - spec.classes.size()));
        // Gram-Schmidt against the directions already drawn.
        for (;;) {
            auto v = gaussian_vector(rng, spec.dim);
            for (const auto& b : basis) {
                const double dot = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
                for (std::size_t d = 0; d < spec.dim; ++d) v[d] -= dot * b[d];
            }
            const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
            if (norm < 1e-6) continue;
            for (auto& x : v) x /= norm;
            basis.push_back(std::move(v));
            break;
        }
    }
    for (auto& b : basis) {
        for (auto& x : b) x *= spec.separation * spec.sigma;
    }
    return basis;
}

Traversal generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const auto means = synthetic_cluster_means(spec);
    const std::size_t n_classes = spec.classes.size();
    const std::size_t n = spec.frame_count();

    // Layout: shuffled contiguous scene runs separated by undefined stretches.
    auto layout_rng = stream_rng(spec.seed, kLayout);
    struct Run {
        std::size_t cluster;
        std::size_t length;
    };
    std::vector<Run> runs;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::size_t base = spec.frames_per_class / spec.runs_per_class;
        const std::size_t extra = spec.frames_per_class % spec.runs_per_class;
        for (std::size_t r = 0; r < spec.runs_per_class; ++r) {
            runs.push_back({c, base + (r < extra ? 1 : 0)});
        }
    }
    std::shuffle(runs.begin(), runs.end(), layout_rng);

    std::vector<std::size_t> cuts(runs.size());
    std::uniform_int_distribution<std::size_t> cut_dist(0, spec.undefined_frames);
    for (auto& c : cuts) c = cut_dist(layout_rng);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(spec.undefined_frames);

    std::vector<std::size_t> cluster_of;
    cluster_of.reserve(n);
    std::uniform_int_distribution<std::size_t> bg_dist(0, std::max<std::size_t>(spec.undefined_clusters, 1) - 1);
    std::size_t prev_cut = 0;
    for (std::size_t g = 0; g <= runs.size(); ++g) {
        const std::size_t gap = cuts[g] - prev_cut;
        prev_cut = cuts[g];
        const std::size_t bg = n_classes + bg_dist(layout_rng);
        cluster_of.insert(cluster_of.end(), gap, bg);
        if (g < runs.size()) {
            cluster_of.insert(cluster_of.end(), runs[g].length, runs[g].cluster);
        }
    }

    auto place_rng = stream_rng(spec.seed, kPlace);
    auto mem_rng = stream_rng(spec.seed, kMemorability);
    auto noise_rng = stream_rng(spec.noise_seed.value_or(spec.seed), kNoise);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::gamma_distribution<double> gamma_a(spec.memorability_alpha, 1.0);
    std::gamma_distribution<double> gamma_b(spec.memorability_beta, 1.0);

    const double rho = spec.place_correlation;
    const double innovation = std::sqrt(1.0 - rho * rho);
    std::vector<double> place = gaussian_vector(place_rng, spec.dim);

    Traversal t;
    t.name = spec.name;
    t.frames.reserve(n);
    t.descriptors = DescriptorMatrix(n, spec.dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            for (auto& p : place) p = rho * p + innovation * normal(place_rng);
        }
        const std::size_t cluster = cluster_of[i];
        auto row = t.descriptors.row(i);
        for (std::size_t d = 0; d < spec.dim; ++d) {
            const double noise = normal(noise_rng);
            row[d] = static_cast<float>(means[cluster][d] + spec.sigma * place[d] +
                                        spec.sigma * spec.appearance_noise * noise);
        }

        const double ga = gamma_a(mem_rng);
        const double gb = gamma_b(mem_rng);
        const double mem = ga + gb > 0.0 ? std::clamp(ga / (ga + gb), 1e-6, 1.0) : 0.5;

        Frame f;
        f.index = i;
        f.id = "f" + std::to_string(i);
        f.position = static_cast<double>(i) * spec.spacing_m;
        f.timestamp_s = static_cast<double>(i) * spec.spacing_m / 10.0;
        f.label = cluster < n_classes ? spec.classes[cluster].name : std::string(kUndefinedLabel);
        f.memorability = mem;
        t.frames.push_back(std::move(f));
    }
    return t;
}

} // namespace vismap
