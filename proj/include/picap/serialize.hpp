#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "picap/evolution.hpp"
#include "picap/infometrics.hpp"
#include "picap/rollout.hpp"
#include "picap/scoring.hpp"
#include "picap/stats.hpp"

namespace picap {

inline constexpr const char* kToolVersion = "0.1.0";

using json = nlohmann::json;

// Raised for malformed configs and files; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json to_json(const EnvSpec& spec);
EnvSpec env_spec_from_json(const json& j);

json to_json(const PolicySpec& spec);
PolicySpec policy_spec_from_json(const json& j);

json to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const json& j);

json to_json(const MetricsReport& report);

json to_json(const EsConfig& cfg);
EsConfig es_config_from_json(const json& j, std::int64_t param_dim);

json to_json(const BagConfig& bag);
BagConfig bag_config_from_json(const json& j);

// FNV-1a digest of a canonical string, hex-encoded; embedded in reports so
// outputs can be traced back to their exact configuration.
std::string digest(const std::string& payload);

// Return matrix persistence: CSV `particle,episode,return` plus a JSON
// sidecar with provenance and extrema (and parameters when present).
void write_return_matrix_csv(const ReturnMatrix& m,
                             const std::filesystem::path& csv_path,
                             const std::filesystem::path& sidecar_path);
ReturnMatrix read_return_matrix_csv(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& sidecar_path);

void write_es_trace_csv(const EsTrace& trace,
                        const std::filesystem::path& path);

void write_bag_csv(const BagResult& result, const std::string& env_name,
                   const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);
std::string read_text_file(const std::filesystem::path& path);
json read_json_file(const std::filesystem::path& path);

// Canonical number formatting used by every CSV writer (round-trips doubles).
std::string format_double(double v);

}  // namespace picap
