#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "picap/infometrics.hpp"
#include "picap/rollout.hpp"

namespace picap {

struct EsConfig {
  std::vector<double> mu0;  // empty = zeros
  double sigma = 0.1;
  std::int64_t population = 100;
  std::int64_t episodes_per_particle = 100;
  double learning_rate = 0.5;
  std::int64_t epochs = 200;
  bool rank_normalize = false;
  bool antithetic = false;
  std::int64_t bins = 100000;  // for the per-epoch PIC estimate
};

struct EsEpoch {
  std::int64_t epoch = 0;
  std::vector<double> mu;  // prior mean that generated this epoch
  double mean_return = 0.0;
  double pic = 0.0;
  double poic = 0.0;
  double eta_star = 1.0;
};

struct EsTrace {
  std::vector<EsEpoch> epochs;
  std::vector<double> final_mu;
};

// Fitness ranks centered into [-0.5, 0.5]; ties share their average rank, so
// constant fitness maps to all zeros.
std::vector<double> centered_ranks(std::span<const double> fitness);

// mu' = mu + lr * (1 / (population * sigma)) * sum_i F~_i eps_i.
std::vector<double> es_step(std::span<const double> mu, const EsConfig& cfg,
                            std::span<const double> fitness,
                            const std::vector<std::vector<double>>& perturbations);

// Evolution strategies over the prior mean. Each epoch samples the
// population from N(mu, sigma^2 I), rolls out episodes_per_particle episodes
// per particle through the rollout module, and measures PIC/POIC on that
// same epoch return matrix (no extra rollouts). Fitness is baseline-centered
// (or rank-normalized) before the update.
EsTrace train_es(const EnvSpec& env_spec, const PolicySpec& policy_spec,
                 const EsConfig& cfg, std::uint64_t master_seed,
                 int workers = 1);

}  // namespace picap
