#include "picap/evolution.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace picap {

std::vector<double> centered_ranks(std::span<const double> fitness) {
  const std::size_t n = fitness.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness[a] < fitness[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && fitness[order[j + 1]] == fitness[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  if (n > 1)
    for (auto& r : ranks) r = r / static_cast<double>(n - 1) - 0.5;
  else
    ranks.assign(n, 0.0);
  return ranks;
}

std::vector<double> es_step(std::span<const double> mu, const EsConfig& cfg,
                            std::span<const double> fitness,
                            const std::vector<std::vector<double>>& perturbations) {
  if (fitness.size() != perturbations.size() ||
      static_cast<std::int64_t>(fitness.size()) != cfg.population)
    throw std::invalid_argument("es_step: fitness/perturbation length mismatch");
  std::vector<double> next(mu.begin(), mu.end());
  const double scale =
      cfg.learning_rate /
      (static_cast<double>(cfg.population) * cfg.sigma);
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    const auto& eps = perturbations[i];
    if (eps.size() != mu.size())
      throw std::invalid_argument("es_step: perturbation dimension mismatch");
    const double w = scale * fitness[i];
    for (std::size_t d = 0; d < eps.size(); ++d) next[d] += w * eps[d];
  }
  return next;
}

namespace {

void validate(const EsConfig& cfg) {
  if (!(cfg.sigma >= 1e-6))
    throw std::invalid_argument("es: sigma too small, no exploration");
  if (cfg.population < 2) throw std::invalid_argument("es: population < 2");
  if (cfg.antithetic && cfg.population % 2 != 0)
    throw std::invalid_argument("es: antithetic sampling needs even population");
  if (cfg.episodes_per_particle < 1)
    throw std::invalid_argument("es: episodes_per_particle < 1");
  if (!(cfg.learning_rate > 0)) throw std::invalid_argument("es: learning_rate <= 0");
  if (cfg.epochs < 0) throw std::invalid_argument("es: epochs < 0");
  if (cfg.bins <= cfg.episodes_per_particle)
    throw std::invalid_argument("es: bins must exceed episodes_per_particle");
}

}  // namespace

EsTrace train_es(const EnvSpec& env_spec, const PolicySpec& policy_spec,
                 const EsConfig& cfg, std::uint64_t master_seed, int workers) {
  validate(cfg);
  const std::int64_t dim =
      param_count(policy_spec, env_spec.state_dim, env_spec.action_space);
  std::vector<double> mu = cfg.mu0;
  if (mu.empty()) mu.assign(static_cast<std::size_t>(dim), 0.0);
  if (static_cast<std::int64_t>(mu.size()) != dim)
    throw std::invalid_argument("es: mu0 length does not match parameter count");

  EsTrace trace;
  trace.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

  std::vector<std::vector<double>> eps(
      static_cast<std::size_t>(cfg.population));
  std::vector<ParameterVector> thetas(
      static_cast<std::size_t>(cfg.population));

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::int64_t i = 0; i < cfg.population; ++i) {
      auto& e = eps[static_cast<std::size_t>(i)];
      e.resize(static_cast<std::size_t>(dim));
      if (cfg.antithetic && (i % 2 == 1)) {
        const auto& prev = eps[static_cast<std::size_t>(i - 1)];
        for (std::int64_t d = 0; d < dim; ++d)
          e[static_cast<std::size_t>(d)] = -prev[static_cast<std::size_t>(d)];
      } else {
        Rng rng = derive_stream(master_seed, kStreamEsPerturb,
                                static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(i));
        for (std::int64_t d = 0; d < dim; ++d)
          e[static_cast<std::size_t>(d)] = rng.normal();
      }
      auto& theta = thetas[static_cast<std::size_t>(i)];
      theta.values.resize(static_cast<std::size_t>(dim));
      for (std::int64_t d = 0; d < dim; ++d)
        theta.values[static_cast<std::size_t>(d)] =
            mu[static_cast<std::size_t>(d)] +
            cfg.sigma * e[static_cast<std::size_t>(d)];
    }

    const std::uint64_t epoch_seed = derive_seed(
        master_seed, kStreamEsEpoch, static_cast<std::uint64_t>(epoch));
    const ReturnMatrix matrix =
        collect_returns_for(env_spec, policy_spec, thetas,
                            cfg.episodes_per_particle, epoch_seed, workers);

    std::vector<double> fitness(static_cast<std::size_t>(cfg.population));
    for (std::int64_t i = 0; i < cfg.population; ++i) {
      double acc = 0.0;
      for (std::int64_t j = 0; j < matrix.m; ++j) acc += matrix.at(i, j);
      fitness[static_cast<std::size_t>(i)] =
          acc / static_cast<double>(matrix.m);
    }

    EsEpoch record;
    record.epoch = epoch;
    record.mu = mu;
    record.mean_return = matrix.mean();
    const PicResult pic = estimate_pic(matrix, cfg.bins);
    record.pic = pic.pic;
    const TemperatureSearch search = optimize_temperature(matrix, {}, {}, workers);
    record.poic = search.poic_star;
    record.eta_star = search.eta_star;
    trace.epochs.push_back(std::move(record));

    std::vector<double> shaped;
    if (cfg.rank_normalize) {
      shaped = centered_ranks(fitness);
    } else {
      const double baseline =
          std::accumulate(fitness.begin(), fitness.end(), 0.0) /
          static_cast<double>(fitness.size());
      shaped = fitness;
      for (auto& f : shaped) f -= baseline;
    }
    mu = es_step(mu, cfg, shaped, eps);
  }
  trace.final_mu = mu;
  return trace;
}

}  // namespace picap
