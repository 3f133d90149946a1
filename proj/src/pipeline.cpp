#include "picap/pipeline.hpp"

#include <cstdlib>
#include <sstream>

namespace picap {

MetricOptions metric_options_from_json(const json& j) {
  MetricOptions opts;
  if (!j.is_object()) return opts;
  if (j.contains("bins")) opts.bins = j.at("bins").get<std::int64_t>();
  if (j.contains("eta") && !j.at("eta").is_null())
    opts.eta = j.at("eta").get<double>();
  if (j.contains("r_max_ref") && !j.at("r_max_ref").is_null())
    opts.r_max_ref = j.at("r_max_ref").get<double>();
  if (j.contains("allow_small_bins"))
    opts.allow_small_bins = j.at("allow_small_bins").get<bool>();
  if (opts.bins < 2) throw ConfigError("metrics: bins must be >= 2");
  if (opts.eta && !(*opts.eta > 0)) throw ConfigError("metrics: eta must be > 0");
  return opts;
}

EstimateOutcome run_estimate(const EnvSpec& env, const PolicySpec& policy,
                             const SamplingPlan& plan,
                             const MetricOptions& opts, int workers) {
  EstimateOutcome outcome;
  outcome.matrix = collect_returns(env, policy, plan, workers);
  outcome.report = compute_metrics(outcome.matrix, opts.bins, opts.eta,
                                   opts.r_max_ref, opts.allow_small_bins,
                                   workers);
  return outcome;
}

std::string matrix_digest(const ReturnMatrix& m) {
  std::string payload;
  payload.reserve(m.returns.size() * 18);
  for (double v : m.returns) {
    payload += format_double(v);
    payload += ',';
  }
  return digest(payload);
}

void emit_estimate(const EstimateOutcome& outcome, const OutputOptions& out,
                   const std::string& config_digest) {
  json report = to_json(outcome.report);
  report["config_digest"] = config_digest;
  report["returns_digest"] = matrix_digest(outcome.matrix);
  write_text_file(out.out_dir / "report.json", report.dump(2) + "\n");
  write_return_matrix_csv(outcome.matrix, out.out_dir / "returns.csv",
                          out.out_dir / "returns.meta.json");
}

SweepOutcome run_sweep(const EnvSpec& env, const std::vector<PolicySpec>& bag,
                       std::int64_t n_per_prior, std::int64_t episodes,
                       std::uint64_t master_seed, const MetricOptions& opts,
                       int workers) {
  if (bag.empty()) throw ConfigError("sweep: empty architecture bag");
  SweepOutcome outcome;
  std::vector<ReturnMatrix> matrices;
  matrices.reserve(bag.size());
  for (std::size_t idx = 0; idx < bag.size(); ++idx) {
    SamplingPlan plan;
    plan.n_particles = n_per_prior;
    plan.episodes_per_particle = episodes;
    plan.master_seed =
        derive_seed(master_seed, kStreamSweep, static_cast<std::uint64_t>(idx));
    matrices.push_back(collect_returns(env, bag[idx], plan, workers));
    outcome.per_prior.push_back(compute_metrics(matrices.back(), opts.bins,
                                                opts.eta, opts.r_max_ref,
                                                opts.allow_small_bins, workers));
  }
  const ReturnMatrix pooled = merge(matrices);
  outcome.pooled = compute_metrics(pooled, opts.bins, opts.eta, opts.r_max_ref,
                                   opts.allow_small_bins, workers);
  outcome.pooled.seed = master_seed;
  std::tie(outcome.pic_cc, outcome.poic_cc) = channel_capacity(outcome.per_prior);
  return outcome;
}

void emit_sweep(const SweepOutcome& outcome, const OutputOptions& out,
                const std::string& config_digest) {
  std::ostringstream os;
  os << "policy,pic,poic,eta_star,h_r,h_r_given_theta,h_o,h_o_given_theta,"
        "normalized_variance,r_min,r_max\n";
  for (const auto& r : outcome.per_prior)
    os << r.policy << "," << format_double(r.pic) << ","
       << format_double(r.poic) << "," << format_double(r.eta_star) << ","
       << format_double(r.h_r) << "," << format_double(r.h_r_given_theta)
       << "," << format_double(r.h_o) << ","
       << format_double(r.h_o_given_theta) << ","
       << format_double(r.normalized_variance) << ","
       << format_double(r.r_min) << "," << format_double(r.r_max) << "\n";
  write_text_file(out.out_dir / "sweep_per_prior.csv", os.str());

  json pooled = to_json(outcome.pooled);
  pooled["config_digest"] = config_digest;
  write_text_file(out.out_dir / "pooled_report.json", pooled.dump(2) + "\n");

  json cc;
  cc["tool_version"] = kToolVersion;
  cc["pic_cc"] = outcome.pic_cc;
  cc["poic_cc"] = outcome.poic_cc;
  cc["priors"] = outcome.per_prior.size();
  cc["config_digest"] = config_digest;
  write_text_file(out.out_dir / "channel_capacity.json", cc.dump(2) + "\n");

  if (out.svg) {
    SvgSeries s;
    s.label = "per-prior";
    s.line = false;
    for (const auto& r : outcome.per_prior) {
      s.xs.push_back(r.pic);
      s.ys.push_back(r.poic);
    }
    write_svg_plot(out.out_dir / "sweep_scatter.svg", "architecture bag",
                   "pic (nats)", "poic (nats)", {s});
  }
}

std::vector<RewardFamily> default_shaping_variants() {
  std::vector<RewardFamily> variants;
  for (double alpha : {1.0, 0.5, 2.0, 5.0}) {
    RewardFamily f;
    f.kind = RewardFamily::Kind::l1;
    f.alpha = alpha;
    variants.push_back(f);
  }
  for (double alpha : {1.0, 0.5, 2.0, 5.0}) {
    RewardFamily f;
    f.kind = RewardFamily::Kind::l2;
    f.alpha = alpha;
    variants.push_back(f);
  }
  for (const auto& [beta, gamma] : std::vector<std::pair<double, double>>{
           {0.01, 0.01}, {0.1, 0.1}, {0.01, 0.1}, {0.05, 0.1}}) {
    RewardFamily f;
    f.kind = RewardFamily::Kind::fraction;
    f.beta = beta;
    f.gamma = gamma;
    variants.push_back(f);
  }
  for (double epsilon : {0.5, 0.1, 0.2, 1.0}) {
    RewardFamily f;
    f.kind = RewardFamily::Kind::sparse;
    f.epsilon = epsilon;
    variants.push_back(f);
  }
  return variants;
}

std::vector<ShapingRow> run_shaping_sweep(
    const std::vector<RewardFamily>& variants, const PolicySpec& policy,
    const SamplingPlan& plan, const MetricOptions& opts, int workers) {
  std::vector<ShapingRow> rows;
  rows.reserve(variants.size());
  for (const auto& family : variants) {
    const EnvSpec env = EnvSpec::pointmaze(family);
    const ReturnMatrix matrix = collect_returns(env, policy, plan, workers);
    ShapingRow row;
    row.family = family;
    row.report = compute_metrics(matrix, opts.bins, opts.eta, opts.r_max_ref,
                                 opts.allow_small_bins, workers);
    rows.push_back(std::move(row));
  }
  return rows;
}

void emit_shaping_sweep(const std::vector<ShapingRow>& rows,
                        const OutputOptions& out) {
  std::ostringstream os;
  os << "family,params,pic,poic,eta_star,r_min,r_max\n";
  for (const auto& row : rows) {
    std::string params;
    switch (row.family.kind) {
      case RewardFamily::Kind::l1:
      case RewardFamily::Kind::l2:
        params = "alpha=" + format_double(row.family.alpha);
        break;
      case RewardFamily::Kind::fraction:
        params = "beta=" + format_double(row.family.beta) +
                 ";gamma=" + format_double(row.family.gamma);
        break;
      case RewardFamily::Kind::sparse:
        params = "epsilon=" + format_double(row.family.epsilon);
        break;
    }
    os << to_string(row.family.kind) << "," << params << ","
       << format_double(row.report.pic) << ","
       << format_double(row.report.poic) << ","
       << format_double(row.report.eta_star) << ","
       << format_double(row.report.r_min) << ","
       << format_double(row.report.r_max) << "\n";
  }
  write_text_file(out.out_dir / "shaping_sweep.csv", os.str());
}

ScoreOutcome run_score(const EnvSpec& env, const PolicySpec& policy,
                       const SamplingPlan& plan, const BagConfig& bag,
                       std::uint64_t bag_seed, int workers) {
  ScoreOutcome outcome;
  const ReturnMatrix matrix = collect_returns(env, policy, plan, workers);
  outcome.r_min_rand = matrix.r_min;
  outcome.r_max_rand = matrix.r_max;
  outcome.bag = run_bag(env, policy, bag, bag_seed, workers);

  ScoreInputs inputs;
  inputs.r_ave = outcome.bag.r_ave_algo;
  inputs.r_min_rand = matrix.r_min;
  inputs.r_max_rand = matrix.r_max;
  inputs.r_max_algo = outcome.bag.r_max_algo;
  outcome.score_algo = normalized_score(inputs);
  outcome.score_rand = random_sampling_score(matrix, outcome.bag.r_max_algo);
  return outcome;
}

void emit_score(const ScoreOutcome& outcome, const std::string& env_name,
                const OutputOptions& out) {
  write_bag_csv(outcome.bag, env_name, out.out_dir / "bag_results.csv");
  json j;
  j["tool_version"] = kToolVersion;
  j["env"] = env_name;
  j["r_ave_algo"] = outcome.bag.r_ave_algo;
  j["r_max_algo"] = outcome.bag.r_max_algo;
  j["r_min_rand"] = outcome.r_min_rand;
  j["r_max_rand"] = outcome.r_max_rand;
  j["normalized_score_algo"] = outcome.score_algo;
  j["normalized_score_rand"] = outcome.score_rand;
  write_text_file(out.out_dir / "scores.json", j.dump(2) + "\n");
}

void emit_correlations(const std::vector<CorrelationEntry>& entries,
                       const std::set<std::string>& excluded,
                       const OutputOptions& out) {
  json rows = json::array();
  for (const auto& e : entries) {
    json row;
    row["metric"] = e.metric;
    row["target"] = e.target;
    row["r"] = e.result.r;
    row["p_value"] = e.result.p_value;
    row["n"] = e.result.n;
    rows.push_back(row);
  }
  json j;
  j["tool_version"] = kToolVersion;
  j["excluded"] = std::vector<std::string>(excluded.begin(), excluded.end());
  j["correlations"] = rows;
  write_text_file(out.out_dir / "correlations.json", j.dump(2) + "\n");
}

void emit_es_trace(const EsTrace& trace, const std::string& tag,
                   const OutputOptions& out) {
  const std::string name = tag.empty() ? "es_trace" : "es_trace_" + tag;
  write_es_trace_csv(trace, out.out_dir / (name + ".csv"));
  if (out.svg) {
    SvgSeries ret, poic;
    ret.label = "mean return";
    ret.color = "#1f77b4";
    poic.label = "poic";
    poic.color = "#d62728";
    for (const auto& e : trace.epochs) {
      ret.xs.push_back(static_cast<double>(e.epoch));
      ret.ys.push_back(e.mean_return);
      poic.xs.push_back(static_cast<double>(e.epoch));
      poic.ys.push_back(e.poic);
    }
    write_svg_plot(out.out_dir / (name + "_return.svg"), "es training " + tag,
                   "epoch", "mean return", {ret});
    write_svg_plot(out.out_dir / (name + "_poic.svg"), "es training " + tag,
                   "epoch", "poic (nats)", {poic});
  }
}

int resolve_workers(std::optional<int> cli_value) {
  if (cli_value) return std::max(1, *cli_value);
  if (const char* env = std::getenv("PICAP_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace picap
