#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "picap/serialize.hpp"
#include "picap/svg.hpp"

namespace picap {

struct MetricOptions {
  std::int64_t bins = 100000;
  std::optional<double> eta;        // fixed temperature instead of the search
  std::optional<double> r_max_ref;  // known maximum return override
  bool allow_small_bins = false;
};

struct OutputOptions {
  std::filesystem::path out_dir = "out";
  bool save_params = false;
  bool svg = false;
};

MetricOptions metric_options_from_json(const json& j);

struct EstimateOutcome {
  ReturnMatrix matrix;
  MetricsReport report;
};

EstimateOutcome run_estimate(const EnvSpec& env, const PolicySpec& policy,
                             const SamplingPlan& plan,
                             const MetricOptions& opts, int workers);

// Digest of the matrix entries, embedded in reports as the input digest.
std::string matrix_digest(const ReturnMatrix& m);

// Writes report.json, returns.csv and returns.meta.json under out_dir.
void emit_estimate(const EstimateOutcome& outcome, const OutputOptions& out,
                   const std::string& config_digest);

struct SweepOutcome {
  std::vector<MetricsReport> per_prior;
  MetricsReport pooled;
  double pic_cc = 0.0;
  double poic_cc = 0.0;
};

// Bag-of-architectures protocol: estimates each prior with N particles,
// merges the matrices for the pooled metrics, and takes per-prior maxima for
// the channel-capacity variant.
SweepOutcome run_sweep(const EnvSpec& env, const std::vector<PolicySpec>& bag,
                       std::int64_t n_per_prior, std::int64_t episodes,
                       std::uint64_t master_seed, const MetricOptions& opts,
                       int workers);

void emit_sweep(const SweepOutcome& outcome, const OutputOptions& out,
                const std::string& config_digest);

struct ShapingRow {
  RewardFamily family;
  MetricsReport report;
};

// The 16-variant reward-shaping sweep on pointmaze (4 families x 4
// hyper-parameter values).
std::vector<RewardFamily> default_shaping_variants();
std::vector<ShapingRow> run_shaping_sweep(
    const std::vector<RewardFamily>& variants, const PolicySpec& policy,
    const SamplingPlan& plan, const MetricOptions& opts, int workers);

void emit_shaping_sweep(const std::vector<ShapingRow>& rows,
                        const OutputOptions& out);

struct ScoreOutcome {
  BagResult bag;
  double score_algo = 0.0;  // normalized score with r_ave^algo
  double score_rand = 0.0;  // random-sampling normalized score
  double r_min_rand = 0.0;
  double r_max_rand = 0.0;
};

ScoreOutcome run_score(const EnvSpec& env, const PolicySpec& policy,
                       const SamplingPlan& plan, const BagConfig& bag,
                       std::uint64_t bag_seed, int workers);

void emit_score(const ScoreOutcome& outcome, const std::string& env_name,
                const OutputOptions& out);

void emit_correlations(const std::vector<CorrelationEntry>& entries,
                       const std::set<std::string>& excluded,
                       const OutputOptions& out);

void emit_es_trace(const EsTrace& trace, const std::string& tag,
                   const OutputOptions& out);

// Resolves the worker count: explicit CLI value, else PICAP_WORKERS, else 1.
int resolve_workers(std::optional<int> cli_value);

}  // namespace picap
