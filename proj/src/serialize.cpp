#include "picap/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace picap {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw ConfigError("config: " + what);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json to_json(const EnvSpec& spec) {
  json j;
  j["id"] = to_string(spec.id);
  j["horizon"] = spec.horizon;
  j["state_dim"] = spec.state_dim;
  if (spec.id == EnvId::synthetic) j["T"] = spec.synthetic_horizon;
  if (spec.id == EnvId::cartpole) {
    j["u_init"] = spec.noise.u_init;
    j["u_dyn"] = spec.noise.u_dyn;
  }
  if (spec.id == EnvId::pointmaze) {
    json r;
    r["family"] = to_string(spec.reward.kind);
    switch (spec.reward.kind) {
      case RewardFamily::Kind::l1:
      case RewardFamily::Kind::l2: r["alpha"] = spec.reward.alpha; break;
      case RewardFamily::Kind::fraction:
        r["beta"] = spec.reward.beta;
        r["gamma"] = spec.reward.gamma;
        break;
      case RewardFamily::Kind::sparse: r["epsilon"] = spec.reward.epsilon; break;
    }
    r["goal"] = spec.reward.goal;
    j["reward"] = r;
  }
  return j;
}

EnvSpec env_spec_from_json(const json& j) {
  if (!j.is_object()) config_error("env section must be an object");
  const auto id_name = require<std::string>(j, "id");
  EnvId id;
  try {
    id = env_id_from_string(id_name);
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
  EnvSpec spec;
  try {
    switch (id) {
      case EnvId::synthetic: {
        const int T = static_cast<int>(
            get_or<std::int64_t>(j, "T", get_or<std::int64_t>(j, "horizon", 3)));
        spec = EnvSpec::synthetic(T);
        break;
      }
      case EnvId::cartpole: {
        NoiseConfig noise;
        noise.u_init = get_or<double>(j, "u_init", 0.05);
        noise.u_dyn = get_or<double>(j, "u_dyn", 0.0);
        spec = EnvSpec::cartpole(noise);
        break;
      }
      case EnvId::pendulum: spec = EnvSpec::pendulum(); break;
      case EnvId::mountain_car: spec = EnvSpec::mountain_car(); break;
      case EnvId::mountain_car_continuous:
        spec = EnvSpec::mountain_car_continuous();
        break;
      case EnvId::acrobot: spec = EnvSpec::acrobot(); break;
      case EnvId::pointmaze: {
        RewardFamily reward;
        if (j.contains("reward")) {
          const json& r = j.at("reward");
          reward.kind = reward_kind_from_string(require<std::string>(r, "family"));
          reward.alpha = get_or<double>(r, "alpha", 1.0);
          reward.beta = get_or<double>(r, "beta", 0.1);
          reward.gamma = get_or<double>(r, "gamma", 0.1);
          reward.epsilon = get_or<double>(r, "epsilon", 0.5);
          reward.goal = get_or<std::vector<double>>(r, "goal", {});
        }
        spec = EnvSpec::pointmaze(reward);
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
  if (j.contains("horizon") && id != EnvId::synthetic &&
      require<std::int64_t>(j, "horizon") != spec.horizon)
    config_error("horizon override does not match environment definition");
  return spec;
}

json to_json(const PolicySpec& spec) {
  json j;
  j["kind"] = spec.kind == PolicySpec::Kind::mlp ? "mlp" : "tabular_sigmoid";
  if (spec.kind == PolicySpec::Kind::mlp) {
    j["hidden_layers"] = spec.arch.hidden_layers;
    j["use_bias"] = spec.arch.use_bias;
    j["activation"] = "tanh";
  }
  json prior;
  prior["family"] = to_string(spec.prior.family);
  if (spec.prior.family == PriorSpec::Family::gaussian) {
    if (spec.prior.mu_vector.empty())
      prior["mu"] = spec.prior.mu;
    else
      prior["mu"] = spec.prior.mu_vector;
    prior["sigma"] = spec.prior.sigma;
  }
  j["prior"] = prior;
  return j;
}

PolicySpec policy_spec_from_json(const json& j) {
  if (!j.is_object()) config_error("policy section must be an object");
  const auto kind = get_or<std::string>(j, "kind", "mlp");

  PriorSpec prior = PriorSpec::gaussian();
  if (j.contains("prior")) {
    const json& p = j.at("prior");
    try {
      prior.family = prior_family_from_string(require<std::string>(p, "family"));
    } catch (const std::invalid_argument& e) {
      config_error(e.what());
    }
    if (prior.family == PriorSpec::Family::gaussian) {
      if (p.contains("mu") && p.at("mu").is_array())
        prior.mu_vector = p.at("mu").get<std::vector<double>>();
      else
        prior.mu = get_or<double>(p, "mu", 0.0);
      prior.sigma = get_or<double>(p, "sigma", 1.0);
      if (!(prior.sigma > 0)) config_error("prior sigma must be > 0");
    }
  }

  try {
    if (kind == "tabular_sigmoid") return PolicySpec::tabular_sigmoid(prior);
    if (kind != "mlp") config_error("unknown policy kind '" + kind + "'");
    ArchitectureSpec arch;
    arch.hidden_layers = get_or<std::vector<int>>(j, "hidden_layers", {});
    arch.use_bias = get_or<bool>(j, "use_bias", true);
    if (j.contains("activation") &&
        j.at("activation").get<std::string>() != "tanh")
      config_error("only tanh activation is supported");
    return PolicySpec::mlp(arch, prior);
  } catch (const std::invalid_argument& e) {
    config_error(e.what());
  }
}

json to_json(const SamplingPlan& plan) {
  json j;
  j["n"] = plan.n_particles;
  j["m"] = plan.episodes_per_particle;
  j["seed"] = plan.master_seed;
  return j;
}

SamplingPlan plan_from_json(const json& j) {
  if (!j.is_object()) config_error("plan section must be an object");
  SamplingPlan plan;
  plan.n_particles = require<std::int64_t>(j, "n");
  plan.episodes_per_particle = require<std::int64_t>(j, "m");
  plan.master_seed = get_or<std::uint64_t>(j, "seed", 1);
  if (plan.n_particles < 2) config_error("plan needs n >= 2");
  if (plan.episodes_per_particle < 1) config_error("plan needs m >= 1");
  return plan;
}

json to_json(const MetricsReport& r) {
  json j;
  j["tool_version"] = kToolVersion;
  j["env"] = r.env;
  j["policy"] = r.policy;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["m"] = r.m;
  j["bins"] = r.bins;
  j["pic"] = r.pic;
  j["h_r"] = r.h_r;
  j["h_r_given_theta"] = r.h_r_given_theta;
  j["poic"] = r.poic;
  j["h_o"] = r.h_o;
  j["h_o_given_theta"] = r.h_o_given_theta;
  j["eta_star"] = r.eta_star;
  j["normalized_variance"] = r.normalized_variance;
  j["r_min"] = r.r_min;
  j["r_max"] = r.r_max;
  return j;
}

json to_json(const EsConfig& cfg) {
  json j;
  j["mu0"] = cfg.mu0;
  j["sigma"] = cfg.sigma;
  j["population"] = cfg.population;
  j["episodes_per_particle"] = cfg.episodes_per_particle;
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["rank_normalize"] = cfg.rank_normalize;
  j["antithetic"] = cfg.antithetic;
  j["bins"] = cfg.bins;
  return j;
}

EsConfig es_config_from_json(const json& j, std::int64_t param_dim) {
  if (!j.is_object()) config_error("es section must be an object");
  EsConfig cfg;
  if (j.contains("mu0")) {
    const json& mu = j.at("mu0");
    if (mu.is_array())
      cfg.mu0 = mu.get<std::vector<double>>();
    else
      cfg.mu0.assign(static_cast<std::size_t>(param_dim), mu.get<double>());
  }
  cfg.sigma = get_or<double>(j, "sigma", cfg.sigma);
  cfg.population = get_or<std::int64_t>(j, "population", cfg.population);
  cfg.episodes_per_particle =
      get_or<std::int64_t>(j, "episodes_per_particle", cfg.episodes_per_particle);
  cfg.learning_rate = get_or<double>(j, "learning_rate", cfg.learning_rate);
  cfg.epochs = get_or<std::int64_t>(j, "epochs", cfg.epochs);
  cfg.rank_normalize = get_or<bool>(j, "rank_normalize", cfg.rank_normalize);
  cfg.antithetic = get_or<bool>(j, "antithetic", cfg.antithetic);
  cfg.bins = get_or<std::int64_t>(j, "bins", cfg.bins);
  return cfg;
}

json to_json(const BagConfig& bag) {
  json algos = json::array();
  for (const auto& a : bag.algorithms) {
    json e;
    e["kind"] = a.name();
    e["candidates"] = a.candidates;
    e["population"] = a.population;
    e["elite_frac"] = a.elite_frac;
    e["iterations"] = a.iterations;
    e["sigma"] = a.sigma;
    e["learning_rate"] = a.learning_rate;
    e["search_episodes"] = a.search_episodes;
    algos.push_back(e);
  }
  json j;
  j["algorithms"] = algos;
  j["seeds"] = bag.seeds;
  j["eval_episodes"] = bag.eval_episodes;
  return j;
}

BagConfig bag_config_from_json(const json& j) {
  if (!j.is_object()) config_error("bag section must be an object");
  BagConfig bag = default_bag();
  if (j.contains("algorithms")) {
    bag.algorithms.clear();
    for (const json& e : j.at("algorithms")) {
      BagAlgorithm a;
      const auto kind = require<std::string>(e, "kind");
      if (kind == "random_search")
        a.kind = BagAlgorithm::Kind::random_search;
      else if (kind == "cem")
        a.kind = BagAlgorithm::Kind::cem;
      else if (kind == "es")
        a.kind = BagAlgorithm::Kind::es;
      else
        config_error("unknown bag algorithm '" + kind + "'");
      a.candidates = get_or<std::int64_t>(e, "candidates", a.candidates);
      a.population = get_or<std::int64_t>(e, "population", a.population);
      a.elite_frac = get_or<double>(e, "elite_frac", a.elite_frac);
      a.iterations = get_or<std::int64_t>(e, "iterations", a.iterations);
      a.sigma = get_or<double>(e, "sigma", a.sigma);
      a.learning_rate = get_or<double>(e, "learning_rate", a.learning_rate);
      a.search_episodes =
          get_or<std::int64_t>(e, "search_episodes", a.search_episodes);
      bag.algorithms.push_back(a);
    }
    if (bag.algorithms.empty()) config_error("bag needs at least one algorithm");
  }
  bag.seeds = get_or<std::int64_t>(j, "seeds", bag.seeds);
  bag.eval_episodes = get_or<std::int64_t>(j, "eval_episodes", bag.eval_episodes);
  return bag;
}

std::string digest(const std::string& payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_return_matrix_csv(const ReturnMatrix& m,
                             const std::filesystem::path& csv_path,
                             const std::filesystem::path& sidecar_path) {
  std::ostringstream os;
  os << "particle,episode,return\n";
  for (std::int64_t i = 0; i < m.n; ++i)
    for (std::int64_t j = 0; j < m.m; ++j)
      os << i << "," << j << "," << format_double(m.at(i, j)) << "\n";
  write_text_file(csv_path, os.str());

  json side;
  side["tool_version"] = kToolVersion;
  side["env"] = to_json(m.env_spec);
  side["plan"] = to_json(m.plan);
  json policies = json::array();
  for (const auto& p : m.policy_specs) policies.push_back(to_json(p));
  side["policies"] = policies;
  side["r_min"] = m.r_min;
  side["r_max"] = m.r_max;
  side["n"] = m.n;
  side["m"] = m.m;
  if (!m.params.empty()) {
    json params = json::array();
    for (const auto& p : m.params) params.push_back(p.values);
    side["parameters"] = params;
  }
  write_text_file(sidecar_path, side.dump(2) + "\n");
}

ReturnMatrix read_return_matrix_csv(const std::filesystem::path& csv_path,
                                    const std::filesystem::path& sidecar_path) {
  const json side = read_json_file(sidecar_path);
  ReturnMatrix m;
  m.env_spec = env_spec_from_json(side.at("env"));
  m.plan = plan_from_json(side.at("plan"));
  for (const json& p : side.at("policies"))
    m.policy_specs.push_back(policy_spec_from_json(p));
  m.n = side.at("n").get<std::int64_t>();
  m.m = side.at("m").get<std::int64_t>();
  m.returns.assign(static_cast<std::size_t>(m.n * m.m), 0.0);
  if (side.contains("parameters"))
    for (const json& p : side.at("parameters"))
      m.params.push_back(ParameterVector{p.get<std::vector<double>>()});

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(in, line) || line != "particle,episode,return")
    throw ConfigError("return matrix CSV header mismatch in " +
                      csv_path.string());
  std::int64_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::int64_t i = 0, j = 0;
    double v = 0.0;
    const char* s = line.c_str();
    const char* end = s + line.size();
    auto r1 = std::from_chars(s, end, i);
    if (r1.ec != std::errc{} || *r1.ptr != ',')
      throw ConfigError("bad CSV row in " + csv_path.string());
    auto r2 = std::from_chars(r1.ptr + 1, end, j);
    if (r2.ec != std::errc{} || *r2.ptr != ',')
      throw ConfigError("bad CSV row in " + csv_path.string());
    v = std::strtod(r2.ptr + 1, nullptr);
    if (i < 0 || i >= m.n || j < 0 || j >= m.m)
      throw ConfigError("CSV index out of range in " + csv_path.string());
    m.returns[static_cast<std::size_t>(i * m.m + j)] = v;
    ++rows;
  }
  if (rows != m.n * m.m)
    throw ConfigError("CSV row count mismatch in " + csv_path.string());
  m.recompute_extrema();
  return m;
}

void write_es_trace_csv(const EsTrace& trace,
                        const std::filesystem::path& path) {
  std::ostringstream os;
  os << "epoch,mean_return,pic,poic,eta_star\n";
  for (const auto& e : trace.epochs)
    os << e.epoch << "," << format_double(e.mean_return) << ","
       << format_double(e.pic) << "," << format_double(e.poic) << ","
       << format_double(e.eta_star) << "\n";
  write_text_file(path, os.str());
}

void write_bag_csv(const BagResult& result, const std::string& env_name,
                   const std::filesystem::path& path) {
  std::ostringstream os;
  os << "algorithm,hyperparams,env,mean_return\n";
  for (const auto& e : result.entries)
    os << e.algorithm << "," << e.hyperparams << "," << env_name << ","
       << format_double(e.mean_return) << "\n";
  write_text_file(path, os.str());
}

}  // namespace picap
