#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "picap/rollout.hpp"

namespace picap {

struct ScoreInputs {
  double r_ave = 0.0;
  double r_min_rand = 0.0;
  double r_max_rand = 0.0;
  std::optional<double> r_max_algo;  // defaults to r_max_rand
};

// (r_ave - r_min_rand) / (max(r_max_rand, r_max_algo) - r_min_rand).
// Not clamped; values below 0 or above 1 are reportable.
double normalized_score(const ScoreInputs& inputs);

// Normalized score with r_ave = mean of all N*M returns.
double random_sampling_score(const ReturnMatrix& m,
                             std::optional<double> r_max_algo = {});

// Desk-scale optimizer bag over deterministic policy parameters.
struct BagAlgorithm {
  enum class Kind { random_search, cem, es };
  Kind kind = Kind::random_search;

  // random_search
  std::int64_t candidates = 200;
  // cem
  std::int64_t population = 64;
  double elite_frac = 0.25;
  // cem + es
  std::int64_t iterations = 20;
  // es
  double sigma = 0.1;
  double learning_rate = 0.5;
  // episodes per candidate evaluation inside the search loop
  std::int64_t search_episodes = 4;

  std::string name() const;
  std::string hyperparams() const;
};

struct BagConfig {
  std::vector<BagAlgorithm> algorithms;
  std::int64_t seeds = 1;           // independent runs per algorithm
  std::int64_t eval_episodes = 100;  // fresh episodes for the final solution
};

// random search + CEM + three ES variants.
BagConfig default_bag();

struct BagEntry {
  std::string algorithm;
  std::string hyperparams;
  std::uint64_t seed = 0;
  double mean_return = 0.0;
};

struct BagResult {
  std::vector<BagEntry> entries;
  double r_ave_algo = 0.0;  // mean over (algorithm, seed) pairs
  double r_max_algo = 0.0;  // best pair
};

// Each algorithm optimizes the policy parameters under its own budget; the
// per-entry result is the mean return of its final solution over
// eval_episodes fresh episodes. Deterministic given master_seed.
BagResult run_bag(const EnvSpec& env_spec, const PolicySpec& policy_spec,
                  const BagConfig& bag, std::uint64_t master_seed,
                  int workers = 1);

}  // namespace picap
