#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "picap/environments.hpp"
#include "picap/policies.hpp"

namespace picap {

struct SamplingPlan {
  std::int64_t n_particles = 2;          // N
  std::int64_t episodes_per_particle = 1;  // M
  std::uint64_t master_seed = 1;
};

// N x M matrix of episodic returns plus provenance. Immutable after
// construction; safe to share read-only across threads.
struct ReturnMatrix {
  std::int64_t n = 0, m = 0;
  std::vector<double> returns;  // row-major, returns[i*m + j]
  EnvSpec env_spec;
  std::vector<PolicySpec> policy_specs;
  SamplingPlan plan;
  double r_min = 0.0, r_max = 0.0;
  std::vector<ParameterVector> params;  // filled only when requested

  double at(std::int64_t i, std::int64_t j) const {
    return returns[static_cast<std::size_t>(i * m + j)];
  }
  double mean() const;
  // Population variance over all N*M entries.
  double variance() const;
  void recompute_extrema();
};

// Runs `fn(i)` for i in [0, count); `workers <= 1` runs inline. Results must
// be written to disjoint slots so the schedule cannot affect the output.
void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& fn);

// Algorithm: draw N parameter particles from the prior, run M episodes each.
// Particle i derives its parameter stream from (master_seed, i); episode
// (i, j) derives env and policy streams from (master_seed, i, j). The result
// is bit-identical across runs and across worker counts.
ReturnMatrix collect_returns(const EnvSpec& env_spec,
                             const PolicySpec& policy_spec,
                             const SamplingPlan& plan, int workers = 1,
                             bool keep_params = false);

// Same episode seeding scheme, but rolls out explicitly supplied parameter
// vectors (ES populations, search candidates).
ReturnMatrix collect_returns_for(const EnvSpec& env_spec,
                                 const PolicySpec& policy_spec,
                                 std::span<const ParameterVector> thetas,
                                 std::int64_t episodes_per_particle,
                                 std::uint64_t master_seed, int workers = 1);

// Mean return of one parameter vector over `episodes` seeded episodes.
double evaluate_params(const EnvSpec& env_spec, const PolicyEvaluator& policy,
                       std::span<const double> theta, std::int64_t episodes,
                       std::uint64_t master_seed);

// Row-concatenation of matrices sharing env spec and M.
ReturnMatrix merge(std::span<const ReturnMatrix> matrices);

}  // namespace picap
