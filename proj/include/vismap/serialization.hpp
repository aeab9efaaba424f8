#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vismap/eval_harness.hpp"
#include "vismap/localization.hpp"
#include "vismap/map_sampling.hpp"
#include "vismap/synthetic.hpp"

// JSON forms of configs, maps and reports. Missing keys take the struct
// defaults. An infinite threshold_s is written as null and null reads back
// as infinity.

namespace vismap {

using json = nlohmann::ordered_json;

void to_json(json& j, const SyntheticSpec& s);
void from_json(const json& j, SyntheticSpec& s);

void to_json(json& j, const SamplerConfig& c);
void from_json(const json& j, SamplerConfig& c);

void to_json(json& j, const LocalizationConfig& c);
void from_json(const json& j, LocalizationConfig& c);

void to_json(json& j, const ExperimentConfig& c);
void from_json(const json& j, ExperimentConfig& c);

void to_json(json& j, const VisualMap& m);
void from_json(const json& j, VisualMap& m);

void to_json(json& j, const AccuracyDelta& d);
void to_json(json& j, const LocalizationReport& r);
void from_json(const json& j, LocalizationReport& r);

void to_json(json& j, const ClassificationEvalReport& r);
void to_json(json& j, const CoverageReport& r);
void to_json(json& j, const LocalizationExperimentReport& r);

/// Gallery file: {"<class>": [[first, last], index, ...], ...}. Ranges are
/// inclusive frame index ranges into `traversal_name`.
std::vector<SceneGallery> galleries_from_json(const json& j, const std::string& traversal_name);

json read_json_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

// Long-format CSV for plotting.
std::string classification_eval_csv(const ClassificationEvalReport& r);
std::string coverage_csv(const CoverageReport& r);
std::string localization_experiment_csv(const LocalizationExperimentReport& r);

} // namespace vismap
