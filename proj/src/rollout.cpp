#include "picap/rollout.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace picap {

double ReturnMatrix::mean() const {
  double acc = 0.0;
  for (double v : returns) acc += v;
  return returns.empty() ? 0.0 : acc / static_cast<double>(returns.size());
}

double ReturnMatrix::variance() const {
  if (returns.empty()) return 0.0;
  const double mu = mean();
  double acc = 0.0;
  for (double v : returns) acc += (v - mu) * (v - mu);
  return acc / static_cast<double>(returns.size());
}

void ReturnMatrix::recompute_extrema() {
  if (returns.empty()) {
    r_min = r_max = 0.0;
    return;
  }
  r_min = std::numeric_limits<double>::infinity();
  r_max = -r_min;
  for (double v : returns) {
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite return in matrix");
    r_min = std::min(r_min, v);
    r_max = std::max(r_max, v);
  }
}

void parallel_for(std::int64_t count, int workers,
                  const std::function<void(std::int64_t)>& fn) {
  if (count <= 0) return;
  workers = static_cast<int>(
      std::min<std::int64_t>(std::max(workers, 1), count));
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

double run_episode(Env& env, const PolicyEvaluator& policy,
                   std::span<const double> theta, std::uint64_t env_seed,
                   Rng& policy_rng) {
  auto obs = env.reset(env_seed);
  thread_local Action action;
  double total = 0.0;
  while (!env.done()) {
    policy.act(theta, obs, policy_rng, action);
    const Transition t = env.step(action);
    total += t.reward;
    obs = t.next_state;
  }
  return total;
}

// Shared rollout core: theta_of(i) supplies particle i's parameters.
ReturnMatrix roll(const EnvSpec& env_spec, const PolicySpec& policy_spec,
                  std::int64_t n, std::int64_t m, std::uint64_t master_seed,
                  int workers,
                  const std::function<std::span<const double>(std::int64_t)>&
                      theta_of) {
  ReturnMatrix out;
  out.n = n;
  out.m = m;
  out.returns.resize(static_cast<std::size_t>(n * m));
  out.env_spec = env_spec;
  out.policy_specs = {policy_spec};
  out.plan = SamplingPlan{n, m, master_seed};

  const PolicyEvaluator policy(policy_spec, env_spec.state_dim,
                               env_spec.action_space);
  parallel_for(n, workers, [&](std::int64_t i) {
    auto env = make_env(env_spec);
    const auto theta = theta_of(i);
    for (std::int64_t j = 0; j < m; ++j) {
      const std::uint64_t env_seed = derive_seed(
          master_seed, kStreamEnv, static_cast<std::uint64_t>(i),
          static_cast<std::uint64_t>(j));
      Rng policy_rng = derive_stream(master_seed, kStreamPolicy,
                                     static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j));
      out.returns[static_cast<std::size_t>(i * m + j)] =
          run_episode(*env, policy, theta, env_seed, policy_rng);
    }
  });
  out.recompute_extrema();
  return out;
}

}  // namespace

ReturnMatrix collect_returns(const EnvSpec& env_spec,
                             const PolicySpec& policy_spec,
                             const SamplingPlan& plan, int workers,
                             bool keep_params) {
  if (plan.n_particles < 2)
    throw std::invalid_argument("sampling plan needs N >= 2");
  if (plan.episodes_per_particle < 1)
    throw std::invalid_argument("sampling plan needs M >= 1");

  // Parameters are drawn up front so particle i's draw depends only on
  // (master_seed, i), never on scheduling.
  std::vector<ParameterVector> thetas(
      static_cast<std::size_t>(plan.n_particles));
  for (std::int64_t i = 0; i < plan.n_particles; ++i) {
    Rng rng = derive_stream(plan.master_seed, kStreamParams,
                            static_cast<std::uint64_t>(i));
    thetas[static_cast<std::size_t>(i)] = sample_params(
        policy_spec, env_spec.state_dim, env_spec.action_space, rng);
  }

  ReturnMatrix out =
      roll(env_spec, policy_spec, plan.n_particles, plan.episodes_per_particle,
           plan.master_seed, workers, [&](std::int64_t i) {
             return std::span<const double>(
                 thetas[static_cast<std::size_t>(i)].values);
           });
  if (keep_params) out.params = std::move(thetas);
  return out;
}

ReturnMatrix collect_returns_for(const EnvSpec& env_spec,
                                 const PolicySpec& policy_spec,
                                 std::span<const ParameterVector> thetas,
                                 std::int64_t episodes_per_particle,
                                 std::uint64_t master_seed, int workers) {
  if (thetas.empty()) throw std::invalid_argument("no parameter vectors");
  if (episodes_per_particle < 1)
    throw std::invalid_argument("episodes_per_particle must be >= 1");
  return roll(env_spec, policy_spec,
              static_cast<std::int64_t>(thetas.size()), episodes_per_particle,
              master_seed, workers, [&](std::int64_t i) {
                return std::span<const double>(
                    thetas[static_cast<std::size_t>(i)].values);
              });
}

double evaluate_params(const EnvSpec& env_spec, const PolicyEvaluator& policy,
                       std::span<const double> theta, std::int64_t episodes,
                       std::uint64_t master_seed) {
  auto env = make_env(env_spec);
  double total = 0.0;
  for (std::int64_t j = 0; j < episodes; ++j) {
    const std::uint64_t env_seed =
        derive_seed(master_seed, kStreamEnv, 0, static_cast<std::uint64_t>(j));
    Rng policy_rng = derive_stream(master_seed, kStreamPolicy, 0,
                                   static_cast<std::uint64_t>(j));
    total += run_episode(*env, policy, theta, env_seed, policy_rng);
  }
  return total / static_cast<double>(episodes);
}

ReturnMatrix merge(std::span<const ReturnMatrix> matrices) {
  if (matrices.empty()) throw std::invalid_argument("merge: empty list");
  ReturnMatrix out;
  out.env_spec = matrices.front().env_spec;
  out.m = matrices.front().m;
  out.plan = matrices.front().plan;
  for (const auto& mat : matrices) {
    if (mat.env_spec.name() != out.env_spec.name())
      throw std::invalid_argument("merge: environment mismatch");
    if (mat.m != out.m) throw std::invalid_argument("merge: M mismatch");
    out.n += mat.n;
    out.returns.insert(out.returns.end(), mat.returns.begin(),
                       mat.returns.end());
    out.policy_specs.insert(out.policy_specs.end(), mat.policy_specs.begin(),
                            mat.policy_specs.end());
  }
  out.plan.n_particles = out.n;
  out.recompute_extrema();
  return out;
}

}  // namespace picap
