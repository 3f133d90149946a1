// picap: policy information capacity toolkit.
//
// Subcommands: estimate, sweep, train-es, score, correlate, shaping-sweep,
// prop1. Every command reads an optional JSON config plus flag overrides and
// writes CSV/JSON (and optional SVG) outputs under --out.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "picap/pipeline.hpp"

namespace {

using picap::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<int> workers;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--out", flags.out_dir, "output directory");
  auto* w = cmd->add_option("--workers", "worker pool size");
  w->check(CLI::PositiveNumber);
  w->each([&flags](const std::string& v) { flags.workers = std::stoi(v); });
  cmd->add_flag("--svg", flags.svg, "also write SVG plots");
}

json load_config(const CommonFlags& flags) {
  if (flags.config_path.empty()) return json::object();
  return picap::read_json_file(flags.config_path);
}

picap::OutputOptions output_options(const CommonFlags& flags, const json& cfg) {
  picap::OutputOptions out;
  out.out_dir = flags.out_dir;
  out.svg = flags.svg;
  if (cfg.contains("output")) {
    const json& o = cfg.at("output");
    if (o.contains("dir") && flags.out_dir == "out")
      out.out_dir = o.at("dir").get<std::string>();
    if (o.contains("svg")) out.svg = out.svg || o.at("svg").get<bool>();
    if (o.contains("save_params"))
      out.save_params = o.at("save_params").get<bool>();
  }
  return out;
}

picap::EnvSpec env_from_config(const json& cfg) {
  if (!cfg.contains("env"))
    throw picap::ConfigError("config: missing 'env' section");
  return picap::env_spec_from_json(cfg.at("env"));
}

picap::PolicySpec policy_from_config(const json& cfg,
                                     const picap::EnvSpec& env) {
  if (cfg.contains("policy"))
    return picap::policy_spec_from_json(cfg.at("policy"));
  if (env.id == picap::EnvId::synthetic)
    return picap::PolicySpec::tabular_sigmoid(
        picap::PriorSpec::gaussian(0.0, 1.0));
  // Reward-shaping default: 2 layers of 4 units, N(0, I), no bias.
  return picap::PolicySpec::mlp({{4, 4}, false},
                                picap::PriorSpec::gaussian(0.0, 1.0));
}

picap::SamplingPlan plan_from_config(const json& cfg) {
  if (!cfg.contains("plan"))
    throw picap::ConfigError("config: missing 'plan' section");
  return picap::plan_from_json(cfg.at("plan"));
}

int config_workers(const json& cfg, const CommonFlags& flags) {
  if (flags.workers) return picap::resolve_workers(flags.workers);
  if (cfg.contains("plan") && cfg.at("plan").contains("workers"))
    return std::max(1, static_cast<int>(
                           cfg.at("plan").at("workers").get<std::int64_t>()));
  return picap::resolve_workers(std::nullopt);
}

picap::MetricOptions metrics_from_config(const json& cfg) {
  if (cfg.contains("metrics"))
    return picap::metric_options_from_json(cfg.at("metrics"));
  return {};
}

// ---------------------------------------------------------------------------

int cmd_estimate(const CommonFlags& flags, json cfg) {
  const picap::EnvSpec env = env_from_config(cfg);
  const picap::PolicySpec policy = policy_from_config(cfg, env);
  const picap::SamplingPlan plan = plan_from_config(cfg);
  const picap::MetricOptions opts = metrics_from_config(cfg);
  const int workers = config_workers(cfg, flags);
  const picap::OutputOptions out = output_options(flags, cfg);

  if (opts.allow_small_bins && opts.bins <= plan.episodes_per_particle)
    std::cerr << "warning: bins (" << opts.bins
              << ") <= episodes per particle (" << plan.episodes_per_particle
              << "); conditional histograms will saturate\n";
  picap::EstimateOutcome outcome =
      picap::run_estimate(env, policy, plan, opts, workers);
  if (out.save_params) {
    // Re-derive the parameter draws for the sidecar round-trip.
    outcome.matrix.params.clear();
    for (std::int64_t i = 0; i < plan.n_particles; ++i) {
      picap::Rng rng = picap::derive_stream(plan.master_seed,
                                            picap::kStreamParams,
                                            static_cast<std::uint64_t>(i));
      outcome.matrix.params.push_back(
          picap::sample_params(policy, env.state_dim, env.action_space, rng));
    }
  }
  picap::emit_estimate(outcome, out, picap::digest(cfg.dump()));
  std::cout << "env=" << outcome.report.env
            << " pic=" << outcome.report.pic
            << " poic=" << outcome.report.poic
            << " eta_star=" << outcome.report.eta_star << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonFlags& flags, json cfg) {
  const picap::EnvSpec env = env_from_config(cfg);
  if (!cfg.contains("bag") || !cfg.at("bag").is_object())
    throw picap::ConfigError("config: sweep needs a 'bag' section");
  const json& bag_cfg = cfg.at("bag");
  const auto n = bag_cfg.contains("n_per_prior")
                     ? bag_cfg.at("n_per_prior").get<std::int64_t>()
                     : 100;
  const auto m = bag_cfg.contains("m") ? bag_cfg.at("m").get<std::int64_t>() : 16;
  const auto seed = bag_cfg.contains("seed")
                        ? bag_cfg.at("seed").get<std::uint64_t>()
                        : 1;
  std::vector<picap::PolicySpec> bag;
  if (bag_cfg.contains("policies")) {
    for (const json& p : bag_cfg.at("policies"))
      bag.push_back(picap::policy_spec_from_json(p));
  } else {
    bag = picap::architecture_bag();
  }
  const picap::MetricOptions opts = metrics_from_config(cfg);
  const int workers = config_workers(cfg, flags);
  const picap::OutputOptions out = output_options(flags, cfg);

  const picap::SweepOutcome outcome =
      picap::run_sweep(env, bag, n, m, seed, opts, workers);
  picap::emit_sweep(outcome, out, picap::digest(cfg.dump()));
  std::cout << "env=" << outcome.pooled.env << " priors=" << bag.size()
            << " pooled_pic=" << outcome.pooled.pic
            << " pooled_poic=" << outcome.pooled.poic
            << " poic_cc=" << outcome.poic_cc << "\n";
  return kExitOk;
}

int cmd_train_es(const CommonFlags& flags, json cfg) {
  const picap::EnvSpec env = env_from_config(cfg);
  const picap::PolicySpec policy = policy_from_config(cfg, env);
  const std::int64_t dim =
      picap::param_count(policy, env.state_dim, env.action_space);
  if (!cfg.contains("es"))
    throw picap::ConfigError("config: missing 'es' section");
  const picap::EsConfig base = picap::es_config_from_json(cfg.at("es"), dim);
  const auto seed = cfg.at("es").contains("seed")
                        ? cfg.at("es").at("seed").get<std::uint64_t>()
                        : 1;
  const int workers = config_workers(cfg, flags);
  const picap::OutputOptions out = output_options(flags, cfg);

  std::vector<double> mu0_sweep;
  if (cfg.at("es").contains("mu0_sweep"))
    mu0_sweep = cfg.at("es").at("mu0_sweep").get<std::vector<double>>();

  if (mu0_sweep.empty()) {
    const picap::EsTrace trace =
        picap::train_es(env, policy, base, seed, workers);
    picap::emit_es_trace(trace, "", out);
    if (!trace.epochs.empty())
      std::cout << "epochs=" << trace.epochs.size() << " final_return="
                << trace.epochs.back().mean_return << "\n";
    else
      std::cout << "epochs=0\n";
    return kExitOk;
  }
  for (std::size_t k = 0; k < mu0_sweep.size(); ++k) {
    picap::EsConfig cfg_k = base;
    cfg_k.mu0.assign(static_cast<std::size_t>(dim), mu0_sweep[k]);
    const picap::EsTrace trace =
        picap::train_es(env, policy, cfg_k, seed, workers);
    std::ostringstream tag;
    tag << "mu" << mu0_sweep[k];
    picap::emit_es_trace(trace, tag.str(), out);
    std::cout << "mu0=" << mu0_sweep[k] << " epochs=" << trace.epochs.size();
    if (!trace.epochs.empty())
      std::cout << " final_return=" << trace.epochs.back().mean_return;
    std::cout << "\n";
  }
  return kExitOk;
}

int cmd_score(const CommonFlags& flags, json cfg) {
  const picap::EnvSpec env = env_from_config(cfg);
  const picap::PolicySpec policy = policy_from_config(cfg, env);
  const picap::SamplingPlan plan = plan_from_config(cfg);
  picap::BagConfig bag = cfg.contains("bag")
                             ? picap::bag_config_from_json(cfg.at("bag"))
                             : picap::default_bag();
  const auto bag_seed = cfg.contains("bag") && cfg.at("bag").contains("seed")
                            ? cfg.at("bag").at("seed").get<std::uint64_t>()
                            : plan.master_seed;
  const int workers = config_workers(cfg, flags);
  const picap::OutputOptions out = output_options(flags, cfg);

  const picap::ScoreOutcome outcome =
      picap::run_score(env, policy, plan, bag, bag_seed, workers);
  picap::emit_score(outcome, env.name(), out);
  std::cout << "env=" << env.name() << " r_ave_algo=" << outcome.bag.r_ave_algo
            << " r_max_algo=" << outcome.bag.r_max_algo
            << " score_algo=" << outcome.score_algo
            << " score_rand=" << outcome.score_rand << "\n";
  return kExitOk;
}

int cmd_correlate(const CommonFlags& flags, const std::string& table_path,
                  const std::vector<std::string>& exclude, json cfg) {
  if (table_path.empty())
    throw picap::ConfigError("correlate: --table is required");
  const picap::MetricTable table = picap::ingest_table(table_path);
  const std::set<std::string> excluded(exclude.begin(), exclude.end());
  std::vector<picap::CorrelationEntry> entries;
  try {
    entries = picap::correlate_all(table, excluded);
  } catch (const std::invalid_argument& e) {
    throw picap::ConfigError(e.what());
  }
  const picap::OutputOptions out = output_options(flags, cfg);
  picap::emit_correlations(entries, excluded, out);
  for (const auto& e : entries)
    if (e.target == "score_a")
      std::cout << e.metric << " vs score_a: R=" << e.result.r
                << " p=" << e.result.p_value << "\n";
  return kExitOk;
}

int cmd_shaping_sweep(const CommonFlags& flags, json cfg) {
  picap::SamplingPlan plan;
  plan.n_particles = 256;
  plan.episodes_per_particle = 16;
  plan.master_seed = 1;
  if (cfg.contains("plan")) plan = picap::plan_from_json(cfg.at("plan"));
  picap::MetricOptions opts = metrics_from_config(cfg);

  picap::PolicySpec policy = picap::PolicySpec::mlp(
      {{4, 4}, false}, picap::PriorSpec::gaussian(0.0, 1.0));
  if (cfg.contains("policy"))
    policy = picap::policy_spec_from_json(cfg.at("policy"));

  const int workers = config_workers(cfg, flags);
  const picap::OutputOptions out = output_options(flags, cfg);
  const auto rows = picap::run_shaping_sweep(picap::default_shaping_variants(),
                                             policy, plan, opts, workers);
  picap::emit_shaping_sweep(rows, out);
  for (const auto& row : rows)
    std::cout << row.family.label() << " pic=" << row.report.pic
              << " poic=" << row.report.poic << "\n";
  return kExitOk;
}

struct Prop1Flags {
  double mu1 = 1.0, mu2 = 0.0, sigma1 = 1.0, sigma2 = 1.0;
  std::int64_t n = 10;
  std::int64_t trials = 100000;
  std::uint64_t seed = 1;
};

int cmd_prop1(const CommonFlags& flags, const Prop1Flags& p, json cfg) {
  picap::Prop1Check check;
  try {
    check = picap::verify_prop1(p.mu1, p.sigma1, p.mu2, p.sigma2, p.n,
                                p.trials, p.seed);
  } catch (const std::invalid_argument& e) {
    throw picap::ConfigError(e.what());
  }
  const picap::OutputOptions out = output_options(flags, cfg);
  json j;
  j["tool_version"] = picap::kToolVersion;
  j["mu1"] = p.mu1;
  j["mu2"] = p.mu2;
  j["sigma1"] = p.sigma1;
  j["sigma2"] = p.sigma2;
  j["n"] = p.n;
  j["trials"] = p.trials;
  j["bound"] = check.bound;
  j["empirical_misorder_rate"] = check.empirical_rate;
  picap::write_text_file(out.out_dir / "prop1.json", j.dump(2) + "\n");
  std::cout << "bound=" << check.bound
            << " empirical_rate=" << check.empirical_rate << "\n";
  return kExitOk;
}

// Flag overrides for the estimate command so quick runs need no config file.
void apply_estimate_flags(json& cfg, const std::string& env_name, int horizon,
                          double u_init, double u_dyn, std::int64_t n,
                          std::int64_t m, std::uint64_t seed,
                          std::int64_t bins) {
  if (!env_name.empty()) {
    json env;
    env["id"] = env_name;
    if (horizon > 0 && env_name == "synthetic") env["T"] = horizon;
    if (env_name == "cartpole") {
      env["u_init"] = u_init;
      env["u_dyn"] = u_dyn;
    }
    cfg["env"] = env;
  }
  if (n > 0 || m > 0) {
    json plan = cfg.contains("plan") ? cfg.at("plan") : json::object();
    if (n > 0) plan["n"] = n;
    if (m > 0) plan["m"] = m;
    plan["seed"] = seed;
    cfg["plan"] = plan;
  }
  if (bins > 0) {
    json metrics = cfg.contains("metrics") ? cfg.at("metrics") : json::object();
    metrics["bins"] = bins;
    cfg["metrics"] = metrics;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy information capacity toolkit"};
  app.require_subcommand(1);

  CommonFlags est_flags, sweep_flags, es_flags, score_flags, corr_flags,
      shape_flags, prop_flags;

  auto* est = app.add_subcommand("estimate", "PIC/POIC from random sampling");
  add_common(est, est_flags);
  std::string est_env;
  int est_horizon = 0;
  double est_u_init = 0.05, est_u_dyn = 0.0;
  std::int64_t est_n = 0, est_m = 0, est_bins = 0;
  std::uint64_t est_seed = 1;
  est->add_option("--env", est_env, "environment id");
  est->add_option("--horizon", est_horizon, "synthetic horizon T");
  est->add_option("--u-init", est_u_init, "cartpole reset noise half-width");
  est->add_option("--u-dyn", est_u_dyn, "cartpole dynamics noise half-width");
  est->add_option("--n", est_n, "parameter particles N");
  est->add_option("--m", est_m, "episodes per particle M");
  est->add_option("--seed", est_seed, "master seed");
  est->add_option("--bins", est_bins, "histogram bins B");
  bool est_save_params = false;
  est->add_flag("--save-params", est_save_params,
                "store parameter draws in the matrix sidecar");

  auto* sweep = app.add_subcommand("sweep", "architecture-bag protocol");
  add_common(sweep, sweep_flags);

  auto* es = app.add_subcommand("train-es", "evolution strategies tracking");
  add_common(es, es_flags);

  auto* score = app.add_subcommand("score", "normalized task scores");
  add_common(score, score_flags);

  auto* corr = app.add_subcommand("correlate", "metric-table correlations");
  add_common(corr, corr_flags);
  std::string corr_table;
  std::vector<std::string> corr_exclude;
  corr->add_option("--table", corr_table, "metric table CSV");
  corr->add_option("--exclude", corr_exclude,
                   "environments to drop (outlier removal)");

  auto* shape = app.add_subcommand("shaping-sweep",
                                   "pointmaze reward-shaping sweep");
  add_common(shape, shape_flags);

  auto* prop = app.add_subcommand("prop1", "policy-selection bound check");
  add_common(prop, prop_flags);
  Prop1Flags p1;
  prop->add_option("--mu1", p1.mu1);
  prop->add_option("--mu2", p1.mu2);
  prop->add_option("--sigma1", p1.sigma1);
  prop->add_option("--sigma2", p1.sigma2);
  prop->add_option("--n", p1.n);
  prop->add_option("--trials", p1.trials);
  prop->add_option("--seed", p1.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (est->parsed()) {
      json cfg = load_config(est_flags);
      apply_estimate_flags(cfg, est_env, est_horizon, est_u_init, est_u_dyn,
                           est_n, est_m, est_seed, est_bins);
      if (est_save_params) {
        json o = cfg.contains("output") ? cfg.at("output") : json::object();
        o["save_params"] = true;
        cfg["output"] = o;
      }
      return cmd_estimate(est_flags, std::move(cfg));
    }
    if (sweep->parsed()) return cmd_sweep(sweep_flags, load_config(sweep_flags));
    if (es->parsed()) return cmd_train_es(es_flags, load_config(es_flags));
    if (score->parsed()) return cmd_score(score_flags, load_config(score_flags));
    if (corr->parsed())
      return cmd_correlate(corr_flags, corr_table, corr_exclude,
                           load_config(corr_flags));
    if (shape->parsed())
      return cmd_shaping_sweep(shape_flags, load_config(shape_flags));
    if (prop->parsed()) return cmd_prop1(prop_flags, p1, load_config(prop_flags));
    std::cerr << "error: no subcommand\n";
    return kExitConfig;
  } catch (const picap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
