#include "vismap/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace vismap {

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

json threshold_to_json(double v) { return std::isinf(v) && v > 0 ? json(nullptr) : json(v); }

double threshold_from_json(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (j.at(key).is_string()) {
        if (j.at(key) != "auto") throw ConfigError(std::string(key) + " must be a number, null or \"auto\"");
        return fallback;
    }
    return j.at(key).is_null() ? std::numeric_limits<double>::infinity() : j.at(key).get<double>();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Fixed formatting keeps reports byte-identical across reruns.
std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

void to_json(json& j, const SyntheticSpec& s) {
    j = json::object();
    j["name"] = s.name;
    j["classes"] = json::array();
    for (const auto& c : s.classes) j["classes"].push_back({{"name", c.name}, {"mean_seed", c.mean_seed}});
    j["frames_per_class"] = s.frames_per_class;
    j["runs_per_class"] = s.runs_per_class;
    j["undefined_frames"] = s.undefined_frames;
    j["undefined_clusters"] = s.undefined_clusters;
    j["dim"] = s.dim;
    j["sigma"] = s.sigma;
    j["separation"] = s.separation;
    j["place_correlation"] = s.place_correlation;
    j["appearance_noise"] = s.appearance_noise;
    j["spacing_m"] = s.spacing_m;
    j["memorability_alpha"] = s.memorability_alpha;
    j["memorability_beta"] = s.memorability_beta;
    j["seed"] = s.seed;
    j["noise_seed"] = s.noise_seed ? json(*s.noise_seed) : json(nullptr);
}

void from_json(const json& j, SyntheticSpec& s) {
    read_opt(j, "name", s.name);
    if (j.contains("classes")) {
        const auto& c = j.at("classes");
        s.classes.clear();
        if (c.is_number_unsigned()) {
            s.classes = default_classes(c.get<std::size_t>());
        } else {
            for (const auto& e : c) {
                if (e.is_string()) {
                    s.classes.push_back({e.get<std::string>(), s.classes.size() + 1});
                } else {
                    s.classes.push_back({e.at("name").get<std::string>(), e.value("mean_seed", std::uint64_t{0})});
                }
            }
        }
    }
    read_opt(j, "frames_per_class", s.frames_per_class);
    read_opt(j, "runs_per_class", s.runs_per_class);
    read_opt(j, "undefined_frames", s.undefined_frames);
    read_opt(j, "undefined_clusters", s.undefined_clusters);
    read_opt(j, "dim", s.dim);
    read_opt(j, "sigma", s.sigma);
    read_opt(j, "separation", s.separation);
    read_opt(j, "place_correlation", s.place_correlation);
    read_opt(j, "appearance_noise", s.appearance_noise);
    read_opt(j, "spacing_m", s.spacing_m);
    read_opt(j, "memorability_alpha", s.memorability_alpha);
    read_opt(j, "memorability_beta", s.memorability_beta);
    read_opt(j, "seed", s.seed);
    if (j.contains("noise_seed") && !j.at("noise_seed").is_null()) {
        s.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    }
}

void to_json(json& j, const SamplerConfig& c) {
    j = json::object();
    j["dist_interval_m"] = c.dist_interval_m;
    j["threshold_mem"] = c.threshold_mem;
    j["threshold_s"] = threshold_to_json(c.threshold_s);
    j["b_mem"] = c.b_mem;
    j["dist_min_m"] = c.dist_min_m;
    j["dist_max_m"] = c.dist_max_m;
    j["budget_fraction"] = optional_json(c.budget_fraction);
    j["excluded_indices"] = c.excluded_indices;
}

void from_json(const json& j, SamplerConfig& c) {
    read_opt(j, "dist_interval_m", c.dist_interval_m);
    read_opt(j, "threshold_mem", c.threshold_mem);
    c.threshold_s = threshold_from_json(j, "threshold_s", c.threshold_s);
    read_opt(j, "b_mem", c.b_mem);
    read_opt(j, "dist_min_m", c.dist_min_m);
    read_opt(j, "dist_max_m", c.dist_max_m);
    if (j.contains("budget_fraction")) {
        c.budget_fraction = j.at("budget_fraction").is_null()
                                ? std::nullopt
                                : std::optional<double>(j.at("budget_fraction").get<double>());
    }
    read_opt(j, "excluded_indices", c.excluded_indices);
}

void to_json(json& j, const LocalizationConfig& c) {
    j = json::object();
    j["window_frames"] = c.window_frames ? json(*c.window_frames) : json(nullptr);
    j["window_m"] = optional_json(c.window_m);
    j["correct_tol_m"] = c.correct_tol_m;
}

void from_json(const json& j, LocalizationConfig& c) {
    if (j.contains("window_frames") || j.contains("window_m")) {
        c.window_frames.reset();
        c.window_m.reset();
        if (j.contains("window_frames") && !j.at("window_frames").is_null()) {
            c.window_frames = j.at("window_frames").get<std::size_t>();
        }
        if (j.contains("window_m") && !j.at("window_m").is_null()) c.window_m = j.at("window_m").get<double>();
    }
    read_opt(j, "correct_tol_m", c.correct_tol_m);
}

void to_json(json& j, const ExperimentConfig& c) {
    j = json::object();
    j["strategies"] = json::array();
    for (Strategy s : c.strategies) j["strategies"].push_back(std::string(to_string(s)));
    j["fractions"] = c.fractions;
    j["budget_fraction"] = c.budget_fraction;
    j["reference_scene_fraction"] = c.reference_scene_fraction;
    j["reference_undefined_fraction"] = c.reference_undefined_fraction;
    j["sampler"] = c.sampler;
    j["exclude_reference_queries"] = c.exclude_reference_queries;
    j["auto_threshold_s"] = c.auto_threshold_s;
    j["seed"] = c.seed;
}

void from_json(const json& j, ExperimentConfig& c) {
    if (j.contains("strategies")) {
        c.strategies.clear();
        for (const auto& s : j.at("strategies")) c.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    read_opt(j, "fractions", c.fractions);
    read_opt(j, "budget_fraction", c.budget_fraction);
    read_opt(j, "reference_scene_fraction", c.reference_scene_fraction);
    read_opt(j, "reference_undefined_fraction", c.reference_undefined_fraction);
    if (j.contains("sampler")) from_json(j.at("sampler"), c.sampler);
    read_opt(j, "exclude_reference_queries", c.exclude_reference_queries);
    if (j.contains("sampler") && j.at("sampler").contains("threshold_s") &&
        j.at("sampler").at("threshold_s") == "auto") {
        c.auto_threshold_s = true;
    }
    read_opt(j, "auto_threshold_s", c.auto_threshold_s);
    read_opt(j, "seed", c.seed);
}

void to_json(json& j, const VisualMap& m) {
    j = json::object();
    j["traversal"] = m.traversal_name;
    j["selected"] = json::array();
    for (const auto& e : m.entries) {
        j["selected"].push_back({{"index", e.index}, {"provenance", std::string(to_string(e.provenance))}});
    }
}

void from_json(const json& j, VisualMap& m) {
    m.traversal_name = j.value("traversal", std::string());
    m.entries.clear();
    for (const auto& e : j.at("selected")) {
        m.entries.push_back({e.at("index").get<std::size_t>(),
                             provenance_from_string(e.at("provenance").get<std::string>())});
    }
    for (std::size_t k = 1; k < m.entries.size(); ++k) {
        if (m.entries[k].index <= m.entries[k - 1].index) {
            throw ConfigError("map.json selected indices must be strictly increasing");
        }
    }
}

void to_json(json& j, const AccuracyDelta& d) {
    j = json::object();
    j["scene_points"] = d.scene_points;
    j["undefined_points"] = d.undefined_points;
    j["scene_relative_pct"] = optional_json(d.scene_relative_pct);
    j["undefined_relative_pct"] = optional_json(d.undefined_relative_pct);
}

void to_json(json& j, const LocalizationReport& r) {
    j = json::object();
    j["accuracy_scene"] = r.accuracy_scene;
    j["accuracy_undefined"] = r.accuracy_undefined;
    j["scene_queries"] = r.scene_queries;
    j["scene_correct"] = r.scene_correct;
    j["undefined_queries"] = r.undefined_queries;
    j["undefined_correct"] = r.undefined_correct;
    j["delta"] = r.delta ? json(*r.delta) : json(nullptr);
    j["queries"] = json::array();
    for (const auto& q : r.queries) {
        j["queries"].push_back({{"query", q.query_index},
                                {"retrieved", q.retrieved ? json(*q.retrieved) : json(nullptr)},
                                {"correct", q.correct},
                                {"category", q.scene ? "scene" : "undefined"}});
    }
}

void from_json(const json& j, LocalizationReport& r) {
    r = LocalizationReport{};
    r.accuracy_scene = j.at("accuracy_scene").get<double>();
    r.accuracy_undefined = j.at("accuracy_undefined").get<double>();
    read_opt(j, "scene_queries", r.scene_queries);
    read_opt(j, "scene_correct", r.scene_correct);
    read_opt(j, "undefined_queries", r.undefined_queries);
    read_opt(j, "undefined_correct", r.undefined_correct);
    if (j.contains("queries")) {
        for (const auto& q : j.at("queries")) {
            QueryOutcome o;
            o.query_index = q.at("query").get<std::size_t>();
            if (!q.at("retrieved").is_null()) o.retrieved = q.at("retrieved").get<std::size_t>();
            o.correct = q.at("correct").get<bool>();
            o.scene = q.at("category").get<std::string>() == "scene";
            r.queries.push_back(o);
        }
    }
}

void to_json(json& j, const ClassificationEvalReport& r) {
    j = json::object();
    j["fold_count"] = r.fold_count;
    j["class_accuracy"] = r.class_accuracy;
    j["scene_average"] = r.scene_average;
    j["undefined_accuracy"] = optional_json(r.undefined_accuracy);
}

void to_json(json& j, const CoverageReport& r) {
    j = json::object();
    j["seed"] = r.seed;
    j["budget_fraction"] = r.budget_fraction;
    j["budget"] = r.budget;
    j["reference_frames"] = r.reference_frames;
    j["points"] = json::array();
    for (const auto& p : r.points) {
        j["points"].push_back({{"strategy", std::string(to_string(p.strategy))},
                               {"fraction", p.fraction},
                               {"map_size", p.map_size},
                               {"sourced", p.sourced},
                               {"scene_included", p.scene_included},
                               {"scene_available", p.scene_available},
                               {"inclusion_pct", p.inclusion_pct}});
    }
}

void to_json(json& j, const LocalizationExperimentReport& r) {
    j = json::object();
    j["seed"] = r.seed;
    j["budget"] = r.budget;
    j["query_traversals"] = r.query_traversals;
    j["baseline_scene"] = r.baseline_scene;
    j["baseline_undefined"] = r.baseline_undefined;
    j["cells"] = json::array();
    for (const auto& c : r.cells) {
        json cell;
        cell["strategy"] = std::string(to_string(c.strategy));
        cell["fraction"] = c.fraction;
        cell["accuracy_scene"] = c.accuracy_scene;
        cell["accuracy_undefined"] = c.accuracy_undefined;
        cell["deltas"] = json::array();
        for (const auto& d : c.deltas) cell["deltas"].push_back(d);
        cell["mean_delta"] = c.mean_delta;
        j["cells"].push_back(std::move(cell));
    }
}

std::vector<SceneGallery> galleries_from_json(const json& j, const std::string& traversal_name) {
    if (!j.is_object()) throw ConfigError("gallery file must be an object of class -> index ranges");
    std::vector<SceneGallery> out;
    for (const auto& [name, ranges] : j.items()) {
        SceneGallery g{name, {}};
        if (!ranges.is_array()) throw ConfigError("gallery '" + name + "' must list index ranges");
        for (const auto& r : ranges) {
            std::size_t first = 0, last = 0;
            if (r.is_number_unsigned()) {
                first = last = r.get<std::size_t>();
            } else if (r.is_array() && r.size() == 2) {
                first = r[0].get<std::size_t>();
                last = r[1].get<std::size_t>();
            } else {
                throw ConfigError("gallery '" + name + "': ranges are [first, last] or a single index");
            }
            if (last < first) throw ConfigError("gallery '" + name + "': range end before start");
            for (std::size_t i = first; i <= last; ++i) g.members.push_back({traversal_name, i});
        }
        out.push_back(std::move(g));
    }
    return out;
}

json read_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw Error("cannot write " + file.string());
    }
}

std::string classification_eval_csv(const ClassificationEvalReport& r) {
    std::ostringstream os;
    os << "class,accuracy_pct\n";
    for (const auto& [name, acc] : r.class_accuracy) os << name << ',' << fmt(acc) << '\n';
    os << "scene_average," << fmt(r.scene_average) << '\n';
    return os.str();
}

std::string coverage_csv(const CoverageReport& r) {
    std::ostringstream os;
    os << "strategy,fraction,map_size,sourced,scene_included,scene_available,inclusion_pct\n";
    for (const auto& p : r.points) {
        os << to_string(p.strategy) << ',' << fmt(p.fraction) << ',' << p.map_size << ',' << p.sourced << ','
           << p.scene_included << ',' << p.scene_available << ',' << fmt(p.inclusion_pct) << '\n';
    }
    return os.str();
}

std::string localization_experiment_csv(const LocalizationExperimentReport& r) {
    std::ostringstream os;
    os << "strategy,fraction,query,accuracy_scene,accuracy_undefined,scene_delta_points,"
          "undefined_delta_points,scene_delta_relative_pct,undefined_delta_relative_pct\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& c : r.cells) {
        for (std::size_t q = 0; q < c.deltas.size(); ++q) {
            const auto& d = c.deltas[q];
            os << to_string(c.strategy) << ',' << fmt(c.fraction) << ',' << r.query_traversals[q] << ','
               << fmt(c.accuracy_scene[q]) << ',' << fmt(c.accuracy_undefined[q]) << ',' << fmt(d.scene_points)
               << ',' << fmt(d.undefined_points) << ',' << opt(d.scene_relative_pct) << ','
               << opt(d.undefined_relative_pct) << '\n';
        }
        const auto& m = c.mean_delta;
        os << to_string(c.strategy) << ',' << fmt(c.fraction) << ",mean,,," << fmt(m.scene_points) << ','
           << fmt(m.undefined_points) << ',' << opt(m.scene_relative_pct) << ','
           << opt(m.undefined_relative_pct) << '\n';
    }
    return os.str();
}

} // namespace vismap
