#include "picap/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "picap/evolution.hpp"

namespace picap {

double normalized_score(const ScoreInputs& inputs) {
  const double top = std::max(inputs.r_max_rand,
                              inputs.r_max_algo.value_or(inputs.r_max_rand));
  const double denom = top - inputs.r_min_rand;
  if (!(denom > 0.0))
    throw std::invalid_argument("normalized_score: zero or negative denominator");
  return (inputs.r_ave - inputs.r_min_rand) / denom;
}

double random_sampling_score(const ReturnMatrix& m,
                             std::optional<double> r_max_algo) {
  ScoreInputs in;
  in.r_ave = m.mean();
  in.r_min_rand = m.r_min;
  in.r_max_rand = m.r_max;
  in.r_max_algo = r_max_algo;
  return normalized_score(in);
}

std::string BagAlgorithm::name() const {
  switch (kind) {
    case Kind::random_search: return "random_search";
    case Kind::cem: return "cem";
    case Kind::es: return "es";
  }
  throw std::invalid_argument("unknown bag algorithm");
}

std::string BagAlgorithm::hyperparams() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::random_search:
      os << "K=" << candidates;
      break;
    case Kind::cem:
      os << "pop=" << population << ";elite=" << elite_frac
         << ";iters=" << iterations;
      break;
    case Kind::es:
      os << "pop=" << population << ";sigma=" << sigma
         << ";lr=" << learning_rate << ";iters=" << iterations;
      break;
  }
  return os.str();
}

BagConfig default_bag() {
  BagConfig bag;
  BagAlgorithm rs;
  rs.kind = BagAlgorithm::Kind::random_search;
  rs.candidates = 200;
  bag.algorithms.push_back(rs);

  BagAlgorithm cem;
  cem.kind = BagAlgorithm::Kind::cem;
  cem.population = 64;
  cem.elite_frac = 0.25;
  cem.iterations = 20;
  bag.algorithms.push_back(cem);

  for (const auto& [sigma, lr] : std::vector<std::pair<double, double>>{
           {0.1, 0.5}, {0.3, 1.0}, {1.0, 2.0}}) {
    BagAlgorithm es;
    es.kind = BagAlgorithm::Kind::es;
    es.population = 50;
    es.sigma = sigma;
    es.learning_rate = lr;
    es.iterations = 60;
    bag.algorithms.push_back(es);
  }
  return bag;
}

namespace {

constexpr std::uint64_t kBagSearch = 1;
constexpr std::uint64_t kBagFinal = 2;

double run_random_search(const EnvSpec& env, const PolicySpec& policy_spec,
                         const PolicyEvaluator& policy,
                         const BagAlgorithm& algo, std::uint64_t seed,
                         std::int64_t eval_episodes) {
  ParameterVector best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < algo.candidates; ++k) {
    Rng rng = derive_stream(seed, kStreamParams, static_cast<std::uint64_t>(k));
    ParameterVector theta =
        sample_params(policy_spec, env.state_dim, env.action_space, rng);
    const double score = evaluate_params(
        env, policy, theta.values, algo.search_episodes,
        derive_seed(seed, kBagSearch, 0, static_cast<std::uint64_t>(k)));
    if (score > best_score) {
      best_score = score;
      best = std::move(theta);
    }
  }
  return evaluate_params(env, policy, best.values, eval_episodes,
                         derive_seed(seed, kBagFinal, 0));
}

double run_cem(const EnvSpec& env, const PolicySpec&,
               const PolicyEvaluator& policy, const BagAlgorithm& algo,
               std::uint64_t seed, std::int64_t eval_episodes) {
  const auto dim = static_cast<std::size_t>(policy.param_count());
  std::vector<double> mu(dim, 0.0), sd(dim, 1.0);
  const auto elite_count = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(
             std::llround(algo.elite_frac * static_cast<double>(algo.population))));
  constexpr double kSdFloor = 0.02;

  std::vector<std::vector<double>> pop(
      static_cast<std::size_t>(algo.population));
  std::vector<double> scores(static_cast<std::size_t>(algo.population));
  for (std::int64_t iter = 0; iter < algo.iterations; ++iter) {
    for (std::int64_t k = 0; k < algo.population; ++k) {
      Rng rng = derive_stream(seed, kStreamParams,
                              static_cast<std::uint64_t>(iter),
                              static_cast<std::uint64_t>(k));
      auto& theta = pop[static_cast<std::size_t>(k)];
      theta.resize(dim);
      for (std::size_t d = 0; d < dim; ++d)
        theta[d] = mu[d] + sd[d] * rng.normal();
      scores[static_cast<std::size_t>(k)] = evaluate_params(
          env, policy, theta, algo.search_episodes,
          derive_seed(seed, kBagSearch, static_cast<std::uint64_t>(iter),
                      static_cast<std::uint64_t>(k)));
    }
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return scores[a] > scores[b];
                     });
    for (std::size_t d = 0; d < dim; ++d) {
      double m = 0.0;
      for (std::int64_t e = 0; e < elite_count; ++e)
        m += pop[order[static_cast<std::size_t>(e)]][d];
      m /= static_cast<double>(elite_count);
      double v = 0.0;
      for (std::int64_t e = 0; e < elite_count; ++e) {
        const double diff = pop[order[static_cast<std::size_t>(e)]][d] - m;
        v += diff * diff;
      }
      v /= static_cast<double>(elite_count);
      mu[d] = m;
      sd[d] = std::max(std::sqrt(v), kSdFloor);
    }
  }
  return evaluate_params(env, policy, mu, eval_episodes,
                         derive_seed(seed, kBagFinal, 0));
}

double run_es_bag(const EnvSpec& env, const PolicySpec&,
                  const PolicyEvaluator& policy, const BagAlgorithm& algo,
                  std::uint64_t seed, std::int64_t eval_episodes) {
  const auto dim = static_cast<std::size_t>(policy.param_count());
  std::vector<double> mu(dim, 0.0);
  EsConfig cfg;
  cfg.population = algo.population;
  cfg.sigma = algo.sigma;
  cfg.learning_rate = algo.learning_rate;

  std::vector<std::vector<double>> eps(
      static_cast<std::size_t>(algo.population));
  std::vector<double> fitness(static_cast<std::size_t>(algo.population));
  for (std::int64_t iter = 0; iter < algo.iterations; ++iter) {
    for (std::int64_t k = 0; k < algo.population; ++k) {
      Rng rng = derive_stream(seed, kStreamEsPerturb,
                              static_cast<std::uint64_t>(iter),
                              static_cast<std::uint64_t>(k));
      auto& e = eps[static_cast<std::size_t>(k)];
      e.resize(dim);
      std::vector<double> theta(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        e[d] = rng.normal();
        theta[d] = mu[d] + algo.sigma * e[d];
      }
      fitness[static_cast<std::size_t>(k)] = evaluate_params(
          env, policy, theta, algo.search_episodes,
          derive_seed(seed, kBagSearch, static_cast<std::uint64_t>(iter),
                      static_cast<std::uint64_t>(k)));
    }
    const double baseline =
        std::accumulate(fitness.begin(), fitness.end(), 0.0) /
        static_cast<double>(fitness.size());
    std::vector<double> centered = fitness;
    for (auto& f : centered) f -= baseline;
    mu = es_step(mu, cfg, centered, eps);
  }
  return evaluate_params(env, policy, mu, eval_episodes,
                         derive_seed(seed, kBagFinal, 0));
}

}  // namespace

BagResult run_bag(const EnvSpec& env_spec, const PolicySpec& policy_spec,
                  const BagConfig& bag, std::uint64_t master_seed,
                  int workers) {
  if (bag.algorithms.empty())
    throw std::invalid_argument("run_bag: needs at least one algorithm");
  if (bag.seeds < 1) throw std::invalid_argument("run_bag: seeds must be >= 1");

  const PolicyEvaluator policy(policy_spec, env_spec.state_dim,
                               env_spec.action_space);
  const std::int64_t total =
      static_cast<std::int64_t>(bag.algorithms.size()) * bag.seeds;
  BagResult result;
  result.entries.resize(static_cast<std::size_t>(total));

  parallel_for(total, workers, [&](std::int64_t idx) {
    const std::size_t a = static_cast<std::size_t>(idx / bag.seeds);
    const std::int64_t s = idx % bag.seeds;
    const BagAlgorithm& algo = bag.algorithms[a];
    const std::uint64_t seed =
        derive_seed(master_seed, kStreamBag, static_cast<std::uint64_t>(a),
                    static_cast<std::uint64_t>(s));
    double score = 0.0;
    switch (algo.kind) {
      case BagAlgorithm::Kind::random_search:
        score = run_random_search(env_spec, policy_spec, policy, algo, seed,
                                  bag.eval_episodes);
        break;
      case BagAlgorithm::Kind::cem:
        score = run_cem(env_spec, policy_spec, policy, algo, seed,
                        bag.eval_episodes);
        break;
      case BagAlgorithm::Kind::es:
        score = run_es_bag(env_spec, policy_spec, policy, algo, seed,
                           bag.eval_episodes);
        break;
    }
    result.entries[static_cast<std::size_t>(idx)] =
        BagEntry{algo.name(), algo.hyperparams(),
                 static_cast<std::uint64_t>(s), score};
  });

  double acc = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : result.entries) {
    acc += e.mean_return;
    best = std::max(best, e.mean_return);
  }
  result.r_ave_algo = acc / static_cast<double>(total);
  result.r_max_algo = best;
  return result;
}

}  // namespace picap
