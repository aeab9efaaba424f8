// vismap: command-line front end for scene retrieval, visual map sampling,
// localization and the evaluation experiments.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vismap/dataset_io.hpp"
#include "vismap/eval_harness.hpp"
#include "vismap/frame_scoring.hpp"
#include "vismap/localization.hpp"
#include "vismap/map_sampling.hpp"
#include "vismap/scene_retrieval.hpp"
#include "vismap/serialization.hpp"
#include "vismap/synthetic.hpp"

namespace fs = std::filesystem;
using namespace vismap;

namespace {

/// Thrown by `eval --assert` when a report misses its threshold.
struct AssertionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
    SyntheticSpec spec = read_json_file(spec_path).get<SyntheticSpec>();
    Traversal t = generate_synthetic(spec);
    t.name = fs::path(out).filename().string();
    write_traversal(t, out);
    std::cout << "wrote " << t.size() << " frames (dim " << t.descriptors.dim() << ") to " << out << "\n";
    return 0;
}

int cmd_classify(const std::string& bundle, const std::string& galleries_path, const std::string& out) {
    const Traversal t = load_traversal(bundle);
    DescriptorStore store(t);
    SceneClassifier classifier(galleries_from_json(read_json_file(galleries_path), t.name), store);
    const auto cls = classify_traversal(t, classifier);

    std::ostringstream os;
    os << "index,id,label,predicted,confidence";
    std::vector<std::string> names;
    for (const auto& [name, unused] : cls.empty() ? std::map<std::string, double>{} : cls.front().per_class_scores) {
        names.push_back(name);
        os << ",score_" << name;
    }
    os << '\n';
    for (std::size_t i = 0; i < cls.size(); ++i) {
        os << i << ',' << t.frames[i].id << ',' << t.frames[i].label << ',' << cls[i].class_name << ','
           << fmt(cls[i].confidence);
        for (const auto& n : names) os << ',' << fmt(cls[i].per_class_scores.at(n));
        os << '\n';
    }
    write_text_file(out, os.str());
    return 0;
}

int cmd_entropy(const std::string& images, std::size_t patch, const std::string& out) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(images)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<double> scores(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) {
        scores[i] = local_entropy_score(load_pgm(files[i]), patch);
    }
    std::ostringstream os;
    os << "index,file,entropy\n";
    for (std::size_t i = 0; i < files.size(); ++i) {
        os << i << ',' << files[i].filename().string() << ',' << fmt(scores[i]) << '\n';
    }
    write_text_file(out, os.str());
    return 0;
}

int cmd_build_map(const std::string& strategy, const std::string& config_path, const std::string& bundle,
                  const std::string& out) {
    const Traversal t = load_traversal(bundle);
    const json cfg_json = read_json_file(config_path);
    SamplerConfig cfg = cfg_json.get<SamplerConfig>();

    std::optional<SceneClassifier> classifier;
    if (cfg_json.contains("galleries")) {
        auto galleries = galleries_from_json(cfg_json.at("galleries"), t.name);
        for (const auto& g : galleries) {
            for (const auto& m : g.members) cfg.excluded_indices.push_back(m.index);
        }
        std::sort(cfg.excluded_indices.begin(), cfg.excluded_indices.end());
        cfg.excluded_indices.erase(std::unique(cfg.excluded_indices.begin(), cfg.excluded_indices.end()),
                                   cfg.excluded_indices.end());
        DescriptorStore store(t);
        classifier.emplace(std::move(galleries), store);
    }
    cfg.validate();

    VisualMap map;
    if (strategy == "distance") {
        map = sample_distance(t, cfg.dist_interval_m, cfg.excluded_indices);
    } else if (strategy == "memorability") {
        map = sample_memorability(t, cfg.threshold_mem, cfg.excluded_indices);
    } else {
        if (!classifier) throw ConfigError("strategy '" + strategy + "' needs \"galleries\" in the config");
        const auto cls = classify_traversal(t, *classifier);
        if (cfg_json.value("threshold_s", json()) == "auto") {
            cfg.threshold_s = label_calibrated_threshold(t, cls, cfg.excluded_indices);
        }
        map = strategy == "context" ? sample_contextual(t, cls, cfg.threshold_s, cfg.excluded_indices)
                                    : sample_dmc(t, cls, cfg);
    }

    std::vector<std::string> warnings;
    if (cfg.budget_fraction) {
        auto budgeted = enforce_budget(map, t, cfg);
        map = std::move(budgeted.map);
        warnings = std::move(budgeted.warnings);
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    json j = map;
    j["strategy"] = strategy;
    j["warnings"] = warnings;
    write_text_file(out, j.dump(2) + "\n");
    std::cout << "selected " << map.size() << " of " << t.size() << " frames\n";
    return 0;
}

int cmd_localize(const std::string& map_path, const std::string& map_bundle, const std::string& queries_bundle,
                 const std::string& config_path, const std::string& baseline_path, const std::string& out) {
    const Traversal map_t = load_traversal(map_bundle);
    const Traversal queries = load_traversal(queries_bundle);
    const VisualMap map = read_json_file(map_path).get<VisualMap>();
    const json cfg_json = read_json_file(config_path);
    const LocalizationConfig cfg = cfg_json.get<LocalizationConfig>();
    const auto excluded = cfg_json.value("excluded_queries", std::vector<std::size_t>{});

    LocalizationReport report = evaluate_localization(queries, LocalizationMap(map, map_t), cfg, excluded);
    if (!baseline_path.empty()) {
        const auto baseline = read_json_file(baseline_path).get<LocalizationReport>();
        report.delta = accuracy_delta(report, baseline);
    }
    write_text_file(out, json(report).dump(2) + "\n");
    std::cout << "scene accuracy " << report.accuracy_scene << "%, undefined accuracy "
              << report.accuracy_undefined << "%\n";
    return 0;
}

// A fresh pass through the configured synthetic world; noise_seed picks the pass.
Traversal synthetic_from_config(const json& cfg, std::optional<std::uint64_t> noise_seed = {}) {
    if (!cfg.contains("synthetic")) throw ConfigError("config has no \"synthetic\" spec");
    SyntheticSpec spec = cfg.at("synthetic").get<SyntheticSpec>();
    if (noise_seed) {
        spec.noise_seed = *noise_seed;
        spec.name += "_q" + std::to_string(*noise_seed);
    }
    return generate_synthetic(spec);
}

Traversal traversal_from_config(const json& cfg, const char* bundle_key) {
    if (cfg.contains(bundle_key)) return load_traversal(cfg.at(bundle_key).get<std::string>());
    return synthetic_from_config(cfg);
}

void write_report(const fs::path& dir, const std::string& stem, const json& config, const json& report,
                  const std::string& csv) {
    json sidecar;
    sidecar["config"] = config;
    sidecar["report"] = report;
    write_text_file(dir / (stem + ".json"), sidecar.dump(2) + "\n");
    write_text_file(dir / (stem + ".csv"), csv);
}

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
    if (!ok) throw AssertionFailure(what);
}

int cmd_eval(const std::string& which, const std::string& config_path, const std::string& out, bool assert_mode) {
    const json cfg = read_json_file(config_path);
    const json asserts = cfg.value("assert", json::object());

    if (which == "classify") {
        const Traversal t = traversal_from_config(cfg, "traversal");
        const auto report = run_classification_eval(t, make_folds(t, cfg.value("fold_count", std::size_t{4})));
        write_report(out, "classification", cfg, report, classification_eval_csv(report));
        std::cout << "scene-class average " << report.scene_average << "%\n";
        if (assert_mode) {
            const double min_avg = asserts.value("min_scene_average", 95.0);
            check(report.scene_average >= min_avg, "scene-class average >= " + fmt(min_avg));
        }
        return 0;
    }

    const ExperimentConfig exp = cfg.value("experiment", json::object()).get<ExperimentConfig>();
    const double at = asserts.value("at_fraction", 0.6);

    if (which == "coverage") {
        const Traversal t = traversal_from_config(cfg, "traversal");
        const auto report = run_coverage_experiment(t, exp);
        write_report(out, "coverage", cfg, report, coverage_csv(report));
        std::cout << coverage_csv(report);
        if (assert_mode) {
            auto pct = [&](Strategy s, double f) -> std::optional<double> {
                for (const auto& p : report.points) {
                    if (p.strategy == s && std::abs(p.fraction - f) < 1e-12) return p.inclusion_pct;
                }
                return std::nullopt;
            };
            const auto dist = pct(Strategy::distance, at), ctx = pct(Strategy::context, at),
                       dmc = pct(Strategy::dmc, at);
            const double gain = asserts.value("min_context_gain_points", 20.0);
            const double gap = asserts.value("max_dmc_gap_points", 5.0);
            check(dist && ctx && *ctx - *dist >= gain, "context inclusion - distance >= " + fmt(gain) + " points");
            check(ctx && dmc && std::abs(*ctx - *dmc) <= gap, "|dmc - context| inclusion <= " + fmt(gap) + " points");
        }
        return 0;
    }

    if (which == "localize") {
        const Traversal map_t = traversal_from_config(cfg, "map_traversal");
        std::vector<Traversal> queries;
        if (cfg.contains("query_traversals")) {
            for (const auto& p : cfg.at("query_traversals")) queries.push_back(load_traversal(p.get<std::string>()));
        } else {
            for (const auto& s : cfg.value("query_noise_seeds", std::vector<std::uint64_t>{101, 202})) {
                queries.push_back(synthetic_from_config(cfg, s));
            }
        }
        const LocalizationConfig loc = cfg.value("localization", json::object()).get<LocalizationConfig>();
        const auto report = run_localization_experiment(map_t, queries, exp, loc);
        write_report(out, "localization", cfg, report, localization_experiment_csv(report));
        std::cout << localization_experiment_csv(report);
        if (assert_mode) {
            auto cell = [&](Strategy s) -> const LocalizationCell* {
                for (const auto& c : report.cells) {
                    if (c.strategy == s && std::abs(c.fraction - at) < 1e-12) return &c;
                }
                return nullptr;
            };
            const auto* dmc = cell(Strategy::dmc);
            const auto* ctx = cell(Strategy::context);
            check(dmc && dmc->mean_delta.scene_points >= 0.0, "dmc scene delta >= 0");
            check(dmc && ctx && dmc->mean_delta.undefined_points >= ctx->mean_delta.undefined_points,
                  "dmc undefined delta >= context undefined delta");
        }
        return 0;
    }
    throw ConfigError("unknown eval '" + which + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vismap: scene retrieval, visual map sampling and localization"};
    app.require_subcommand(1);

    std::string spec, out, bundle, galleries, images, strategy, config, map_path, map_bundle, queries, baseline;
    std::size_t patch = 16;
    bool assert_mode = false;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic traversal bundle");
    synth->add_option("--spec", spec, "Synthetic spec JSON")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", out, "Output bundle directory")->required();

    auto* classify = app.add_subcommand("classify", "Classify every frame against scene galleries");
    classify->add_option("--map", bundle, "Traversal bundle")->required()->check(CLI::ExistingDirectory);
    classify->add_option("--galleries", galleries, "Gallery JSON (class -> index ranges)")
        ->required()
        ->check(CLI::ExistingFile);
    classify->add_option("--out", out, "Output CSV")->required();

    auto* entropy = app.add_subcommand("entropy", "Local pixel entropy of every .pgm image in a directory");
    entropy->add_option("--images", images, "Image directory")->required()->check(CLI::ExistingDirectory);
    entropy->add_option("--patch", patch, "Tile side length in pixels")->capture_default_str();
    entropy->add_option("--out", out, "Output CSV")->required();

    auto* build = app.add_subcommand("build-map", "Sample a visual map from a traversal");
    build->add_option("--strategy", strategy, "Sampling strategy")
        ->required()
        ->check(CLI::IsMember({"distance", "memorability", "context", "dmc"}));
    build->add_option("--config", config, "Sampler config JSON")->required()->check(CLI::ExistingFile);
    build->add_option("--traversal", bundle, "Traversal bundle")->required()->check(CLI::ExistingDirectory);
    build->add_option("--out", out, "Output map.json")->required();

    auto* localize = app.add_subcommand("localize", "Localize a query traversal against a visual map");
    localize->add_option("--map", map_path, "map.json")->required()->check(CLI::ExistingFile);
    localize->add_option("--map-traversal", map_bundle, "Bundle the map was sampled from")
        ->required()
        ->check(CLI::ExistingDirectory);
    localize->add_option("--queries", queries, "Query traversal bundle")->required()->check(CLI::ExistingDirectory);
    localize->add_option("--config", config, "Localization config JSON")->required()->check(CLI::ExistingFile);
    localize->add_option("--baseline", baseline, "Baseline report.json for deltas")->check(CLI::ExistingFile);
    localize->add_option("--out", out, "Output report.json")->required();

    auto* eval = app.add_subcommand("eval", "Run an evaluation experiment");
    eval->require_subcommand(1);
    std::string eval_which;
    for (const char* name : {"classify", "coverage", "localize"}) {
        auto* sub = eval->add_subcommand(name, std::string("Run the ") + name + " experiment");
        sub->add_option("--config", config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory")->required();
        sub->add_flag("--assert", assert_mode, "Exit nonzero when a threshold is violated");
        sub->callback([&eval_which, name] { eval_which = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(spec, out);
        if (*classify) return cmd_classify(bundle, galleries, out);
        if (*entropy) return cmd_entropy(images, patch, out);
        if (*build) return cmd_build_map(strategy, config, bundle, out);
        if (*localize) return cmd_localize(map_path, map_bundle, queries, config, baseline, out);
        if (*eval) return cmd_eval(eval_which, config, out, assert_mode);
    } catch (const AssertionFailure&) {
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
