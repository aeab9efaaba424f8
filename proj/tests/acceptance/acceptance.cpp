// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "vismap/dataset_io.hpp"
#include "vismap/eval_harness.hpp"
#include "vismap/frame_scoring.hpp"
#include "vismap/localization.hpp"
#include "vismap/map_sampling.hpp"
#include "vismap/scene_retrieval.hpp"
#include "vismap/synthetic.hpp"

using namespace vismap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && secs >= limit_s) {
        out.pass = false;
        out.detail += "; exceeded " + std::to_string(limit_s) + " s";
    }
    if (!out.pass) ++g_failures;
    std::printf("[%s] %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v, int prec = 2) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

Traversal make_1d(const std::string& name, const std::vector<double>& pos, const std::vector<std::string>& labels,
                  const std::vector<double>& mem, const std::vector<std::vector<float>>& desc) {
    Traversal t;
    t.name = name;
    t.descriptors = DescriptorMatrix(pos.size(), desc.front().size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
        t.frames.push_back({name + std::to_string(i), i, pos[i], std::nullopt, labels[i], mem[i]});
        std::copy(desc[i].begin(), desc[i].end(), t.descriptors.row(i).begin());
    }
    return t;
}

Traversal random_1d(std::mt19937_64& rng, const std::string& name, std::size_t n, std::size_t dim, bool integers) {
    std::normal_distribution<float> nd;
    std::uniform_int_distribution<int> id(-2, 2);
    std::vector<double> pos;
    std::vector<std::string> labels(n, std::string(kUndefinedLabel));
    std::vector<double> mem(n, 0.5);
    std::vector<std::vector<float>> desc;
    for (std::size_t i = 0; i < n; ++i) {
        pos.push_back(10.0 * static_cast<double>(i));
        std::vector<float> d(dim);
        for (auto& x : d) x = integers ? static_cast<float>(id(rng)) : nd(rng);
        desc.push_back(d);
    }
    return make_1d(name, pos, labels, mem, desc);
}

SyntheticSpec scenario_spec(std::uint64_t seed) {
    // 4 scene classes + undefined, 5 sigma, 2000 frames of which 10% are scene frames.
    SyntheticSpec s;
    s.name = "map";
    s.classes = default_classes(4, seed);
    s.frames_per_class = 50;
    s.runs_per_class = 2;
    s.undefined_frames = 1800;
    s.dim = 16;
    s.sigma = 1.0;
    s.separation = 5.0;
    s.seed = seed;
    return s;
}

ExperimentConfig scenario_experiment(std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.budget_fraction = 0.5;
    cfg.sampler.b_mem = -0.2;
    cfg.auto_threshold_s = true;
    cfg.seed = seed;
    return cfg;
}

const CoveragePoint& point(const CoverageReport& r, Strategy s, double f) {
    for (const auto& p : r.points) {
        if (p.strategy == s && p.fraction == f) return p;
    }
    throw Error("missing coverage point");
}

const LocalizationCell& cell(const LocalizationExperimentReport& r, Strategy s, double f) {
    for (const auto& c : r.cells) {
        if (c.strategy == s && c.fraction == f) return c;
    }
    throw Error("missing localization cell");
}

} // namespace

int main() {
    constexpr std::uint64_t kSeed = 2024;

    criterion("format round-trip, 1000 random bundles", 30.0, [] {
        const fs::path root = fs::temp_directory_path() / "vismap_acceptance_rt";
        fs::remove_all(root);
        std::mt19937_64 rng(kSeed);
        std::size_t ok = 0;
        for (int i = 0; i < 1000; ++i) {
            SyntheticSpec s;
            s.name = "b" + std::to_string(i);
            s.classes = default_classes(1 + rng() % 4, rng());
            s.frames_per_class = 2 + rng() % 12;
            s.runs_per_class = 1 + rng() % 2;
            s.undefined_frames = rng() % 30;
            s.undefined_clusters = 1 + rng() % 2;
            s.dim = 8 + rng() % 17;
            s.sigma = 0.1 + static_cast<double>(rng() % 100) / 10.0;
            s.spacing_m = 0.5 + static_cast<double>(rng() % 300) / 10.0;
            s.seed = rng();
            auto t = generate_synthetic(s);
            if (i % 5 == 0) t.frames[0].memorability.reset();
            if (i % 7 == 0) t.frames.back().timestamp_s.reset();
            const fs::path dir = root / t.name;
            write_traversal(t, dir);
            ok += load_traversal(dir) == t ? 1 : 0;
        }
        fs::remove_all(root);
        return Outcome{ok == 1000, std::to_string(ok) + "/1000 identical after write and load"};
    });

    criterion("classifier matches brute-force mean distances and argmin", 0, [] {
        std::mt19937_64 rng(kSeed + 1);
        std::size_t queries = 0, mismatches = 0, ties = 0;
        const std::vector<std::string> pool{"undefined", "crossing", "tunnel", "bridge", "station", "alpha", "zeta"};
        for (int inst = 0; inst < 50; ++inst) {
            const std::size_t dim = 1 + rng() % 8;
            const bool integers = inst % 2 == 0;
            const auto refs = random_1d(rng, "refs", 100, dim, integers);
            const auto qs = random_1d(rng, "q", 20, dim, integers);
            std::vector<std::string> names = pool;
            std::shuffle(names.begin(), names.end(), rng);
            names.resize(2 + rng() % 4);
            std::vector<SceneGallery> galleries;
            for (const auto& n : names) {
                std::vector<std::size_t> members(100);
                std::iota(members.begin(), members.end(), 0);
                std::shuffle(members.begin(), members.end(), rng);
                members.resize(1 + rng() % 20);
                SceneGallery g{n, {}};
                for (auto m : members) g.members.push_back({"refs", m});
                galleries.push_back(g);
            }
            if (inst % 5 == 0) {
                // An exact copy under another name forces a tie.
                galleries.push_back(galleries[rng() % galleries.size()]);
                galleries.back().class_name = "copy" + std::to_string(inst);
            }
            DescriptorStore store(refs);
            const SceneClassifier classifier(galleries, store);
            const auto got = classify_traversal(qs, classifier);

            for (std::size_t q = 0; q < qs.size(); ++q) {
                ++queries;
                std::map<std::string, double> expected;
                for (const auto& g : galleries) {
                    double sum = 0.0;
                    for (const auto& m : g.members) {
                        double acc = 0.0;
                        for (std::size_t k = 0; k < dim; ++k) {
                            const double d = static_cast<double>(qs.descriptor(q)[k]) -
                                             static_cast<double>(refs.descriptor(m.index)[k]);
                            acc += d * d;
                        }
                        sum += std::sqrt(acc);
                    }
                    expected[g.class_name] = sum / static_cast<double>(g.members.size());
                }
                std::string best;
                double best_v = std::numeric_limits<double>::infinity();
                std::size_t at_min = 0;
                for (const auto& [n, v] : expected) { // std::map iterates names in order
                    if (v < best_v) {
                        best_v = v;
                        best = n;
                    }
                }
                for (const auto& [n, v] : expected) at_min += v == best_v ? 1 : 0;
                ties += at_min > 1 ? 1 : 0;
                const auto& c = got[q];
                if (c.per_class_scores != expected || c.class_name != best || c.confidence != best_v) ++mismatches;
            }
        }
        return Outcome{mismatches == 0, std::to_string(queries) + " queries over 50 instances, " +
                                            std::to_string(mismatches) + " mismatches, " + std::to_string(ties) +
                                            " exact ties resolved"};
    });

    criterion("argmin scale invariance, classify and localize", 0, [] {
        std::mt19937_64 rng(kSeed + 2);
        std::size_t checks = 0, changed = 0;
        for (int inst = 0; inst < 100; ++inst) {
            const std::size_t dim = 2 + rng() % 7;
            const auto refs = random_1d(rng, "refs", 60, dim, false);
            const auto qs = random_1d(rng, "q", 30, dim, false);
            std::vector<SceneGallery> galleries;
            for (std::size_t c = 0; c < 3; ++c) {
                SceneGallery g{"c" + std::to_string(c), {}};
                for (std::size_t m = c * 10; m < c * 10 + 10; ++m) g.members.push_back({"refs", m});
                galleries.push_back(g);
            }
            VisualMap map{"refs", {}};
            for (std::size_t i = 0; i < refs.size(); i += 2) map.entries.push_back({i, Provenance::distance});
            LocalizationConfig lc;
            lc.window_frames = 8;

            std::vector<std::string> base_cls;
            std::vector<std::optional<std::size_t>> base_loc;
            for (float scale : {1.0f, 0.01f, 100.0f}) {
                Traversal r2 = refs, q2 = qs;
                for (auto& v : r2.descriptors.values()) v *= scale;
                for (auto& v : q2.descriptors.values()) v *= scale;
                DescriptorStore store(r2);
                const SceneClassifier classifier(galleries, store);
                const LocalizationMap lmap(map, r2);
                const auto cls = classify_traversal(q2, classifier);
                for (std::size_t q = 0; q < q2.size(); ++q) {
                    const auto loc = localize(q2.frames[q].position, q2.descriptor(q), lmap, lc);
                    if (scale == 1.0f) {
                        base_cls.push_back(cls[q].class_name);
                        base_loc.push_back(loc);
                        continue;
                    }
                    checks += 2;
                    changed += cls[q].class_name != base_cls[q] ? 1 : 0;
                    changed += loc != base_loc[q] ? 1 : 0;
                }
            }
        }
        return Outcome{changed == 0, std::to_string(checks) + " scaled answers compared, " +
                                         std::to_string(changed) + " changed"};
    });

    criterion("DMC reduces to distance sampling", 0, [] {
        std::mt19937_64 rng(kSeed + 3);
        std::size_t equal = 0, admitted = 0;
        for (int inst = 0; inst < 100; ++inst) {
            SyntheticSpec s;
            s.name = "r" + std::to_string(inst);
            s.classes = default_classes(2 + rng() % 3, rng());
            s.frames_per_class = 20 + rng() % 40;
            s.runs_per_class = 1 + rng() % 3;
            s.undefined_frames = 20 + rng() % 100;
            s.spacing_m = 1.0 + static_cast<double>(rng() % 200) / 10.0;
            s.seed = rng();
            const auto t = generate_synthetic(s);
            const auto refs = select_references(t, 0.25, 0.10, rng());
            // Scene galleries only: no frame can be classified undefined.
            std::vector<SceneGallery> scene;
            for (const auto& g : refs.galleries)
                if (g.class_name != kUndefinedLabel) scene.push_back(g);
            DescriptorStore store(t);
            const SceneClassifier classifier(scene, store);
            SamplerConfig cfg;
            cfg.threshold_s = 0.0;
            cfg.threshold_mem = 0.0;
            cfg.dist_min_m = s.spacing_m * (1.0 + static_cast<double>(rng() % 70) / 10.0) + 0.013;
            cfg.dist_max_m = cfg.dist_min_m * 3.0;
            cfg.dist_interval_m = cfg.dist_min_m;
            cfg.excluded_indices = refs.excluded;
            const auto dmc = sample_dmc(t, classifier, cfg);
            const auto dist = sample_distance(t, cfg.dist_interval_m, refs.excluded);
            equal += dmc.indices() == dist.indices() ? 1 : 0;
            admitted += dmc.size();
        }
        return Outcome{equal == 100, std::to_string(equal) + "/100 traversals identical (" +
                                         std::to_string(admitted) + " admissions)"};
    });

    criterion("DMC branch ladder hand trace", 0, [] {
        const auto refs = make_1d("refs", {0, 1}, {"a", "undefined"}, {0.5, 0.5}, {{0.0f}, {10.0f}});
        const auto t = make_1d("trace", {0, 10, 20, 30, 40, 70}, {"A", "undefined", "A", "A", "A", "A"},
                               {0.2, 0.5, 0.9, 1.0, 0.1, 0.1}, {{0.5f}, {8.0f}, {3.0f}, {1.1f}, {3.0f}, {3.0f}});
        DescriptorStore store(refs);
        const SceneClassifier classifier({SceneGallery{"A", {{"refs", 0}}}, SceneGallery{"undefined", {{"refs", 1}}}}, store);
        SamplerConfig cfg;
        cfg.dist_min_m = 15;
        cfg.dist_max_m = 35;
        cfg.threshold_s = 1.0;
        cfg.threshold_mem = 0.5;
        cfg.b_mem = -0.2;
        const auto m = sample_dmc(t, classifier, cfg);
        const std::vector<MapEntry> expected{{0, Provenance::context},
                                             {2, Provenance::memorability},
                                             {3, Provenance::context},
                                             {5, Provenance::dist_max_fallback}};
        std::string got;
        for (const auto& e : m.entries) got += std::to_string(e.index) + ":" + std::string(to_string(e.provenance)) + " ";
        return Outcome{m.entries == expected, "admitted " + got};
    });

    criterion("entropy fixtures", 0, [] {
        const double constant = local_entropy_score(GrayImage(16, 16, std::vector<std::uint8_t>(256, 128)), 4);
        std::vector<std::uint8_t> board(64);
        for (std::size_t y = 0; y < 8; ++y)
            for (std::size_t x = 0; x < 8; ++x) board[y * 8 + x] = (x + y) % 2 ? 255 : 0;
        const double checker = local_entropy_score(GrayImage(8, 8, board), 2);
        std::mt19937_64 rng(kSeed + 5);
        std::uniform_int_distribution<int> d(0, 255);
        std::vector<std::uint8_t> noise(256);
        for (auto& p : noise) p = static_cast<std::uint8_t>(d(rng));
        const double random = local_entropy_score(GrayImage(16, 16, noise), 16);
        const bool pass = constant == 0.0 && std::abs(checker - 0.125) <= 1e-9 && random > 0.85;
        return Outcome{pass, "constant " + fmt(constant, 3) + ", checkerboard " + fmt(checker, 12) + ", random " +
                                 fmt(random, 4)};
    });

    criterion("scene coverage: context vs distance, DMC vs context", 60.0, [] {
        const auto t = generate_synthetic(scenario_spec(kSeed));
        const auto r = run_coverage_experiment(t, scenario_experiment(kSeed));
        const double dist = point(r, Strategy::distance, 0.6).inclusion_pct;
        const double ctx = point(r, Strategy::context, 0.6).inclusion_pct;
        const double dmc = point(r, Strategy::dmc, 0.6).inclusion_pct;
        const bool pass = ctx - dist >= 20.0 && std::abs(dmc - ctx) <= 5.0;
        return Outcome{pass, "frames " + std::to_string(t.size()) + ", budget " + std::to_string(r.budget) +
                                 ", at 0.6: distance " + fmt(dist) + "%, context " + fmt(ctx) + "%, dmc " +
                                 fmt(dmc) + "% (gain " + fmt(ctx - dist) + " pts, dmc gap " +
                                 fmt(std::abs(dmc - ctx)) + " pts)"};
    });

    criterion("localization deltas: DMC vs distance and context", 120.0, [] {
        auto spec = scenario_spec(kSeed);
        const auto map_t = generate_synthetic(spec);
        std::vector<Traversal> queries;
        for (std::uint64_t noise : {101u, 202u}) {
            spec.name = "query" + std::to_string(noise);
            spec.noise_seed = noise;
            queries.push_back(generate_synthetic(spec));
        }
        auto cfg = scenario_experiment(kSeed);
        cfg.fractions = {0.6};
        cfg.strategies = {Strategy::context, Strategy::dmc};
        const LocalizationConfig lc; // window of 100 frames, 25 m tolerance
        const auto r = run_localization_experiment(map_t, queries, cfg, lc);
        const auto& dmc = cell(r, Strategy::dmc, 0.6).mean_delta;
        const auto& ctx = cell(r, Strategy::context, 0.6).mean_delta;
        const bool pass = dmc.scene_points >= 0.0 && dmc.undefined_points >= ctx.undefined_points;
        return Outcome{pass, "baseline scene " + fmt(r.baseline_scene[0]) + "/" + fmt(r.baseline_scene[1]) +
                                 "%, undefined " + fmt(r.baseline_undefined[0]) + "/" +
                                 fmt(r.baseline_undefined[1]) + "%; dmc scene " + fmt(dmc.scene_points) +
                                 " pts, dmc undefined " + fmt(dmc.undefined_points) + " pts, context undefined " +
                                 fmt(ctx.undefined_points) + " pts"};
    });

    criterion("4-fold accounting", 0, [] {
        auto spec = scenario_spec(kSeed + 7);
        spec.frames_per_class = 61; // not divisible by 4
        const auto t = generate_synthetic(spec);
        const auto r = run_classification_eval(t, make_folds(t, 4));
        std::size_t bad = 0, scene = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t.frames[i].is_scene()) continue;
            ++scene;
            bad += r.reference_uses[i] == 1 && r.test_uses[i] == 3 ? 0 : 1;
        }
        return Outcome{bad == 0, std::to_string(scene) + " scene frames, " + std::to_string(bad) +
                                     " with wrong use counts; scene average " + fmt(r.scene_average) + "%"};
    });

    std::printf("%d failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
