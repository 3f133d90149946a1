#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "picap/rng.hpp"

namespace picap {

enum class EnvId {
  synthetic,
  cartpole,
  pendulum,
  mountain_car,
  mountain_car_continuous,
  acrobot,
  pointmaze,
};

std::string to_string(EnvId id);
EnvId env_id_from_string(const std::string& name);

struct ActionSpace {
  enum class Kind { discrete, continuous };
  Kind kind = Kind::discrete;
  int n = 0;                       // discrete choice count
  std::vector<double> low, high;   // continuous bounds, size == dim

  int dim() const { return static_cast<int>(low.size()); }

  static ActionSpace make_discrete(int n);
  static ActionSpace make_continuous(std::vector<double> low,
                                     std::vector<double> high);
  bool operator==(const ActionSpace&) const = default;
};

struct NoiseConfig {
  double u_init = 0.05;  // uniform half-width on all state dims at reset
  double u_dyn = 0.0;    // uniform half-width added to angular velocity per step
  bool operator==(const NoiseConfig&) const = default;
};

struct RewardFamily {
  enum class Kind { l1, l2, fraction, sparse };
  Kind kind = Kind::l2;
  double alpha = 1.0;    // l1 / l2 scale
  double beta = 0.1;     // fraction numerator
  double gamma = 0.1;    // fraction denominator offset
  double epsilon = 0.5;  // sparse radius
  std::vector<double> goal;  // empty = environment default

  std::string label() const;
  bool operator==(const RewardFamily&) const = default;
};

std::string to_string(RewardFamily::Kind kind);
RewardFamily::Kind reward_kind_from_string(const std::string& name);

struct EnvSpec {
  EnvId id = EnvId::synthetic;
  int horizon = 0;
  int state_dim = 0;
  ActionSpace action_space;
  int synthetic_horizon = 3;  // T for the synthetic MDP
  NoiseConfig noise;          // cartpole only
  RewardFamily reward;        // pointmaze only

  static EnvSpec synthetic(int T);
  static EnvSpec cartpole(NoiseConfig noise = {});
  static EnvSpec pendulum();
  static EnvSpec mountain_car();
  static EnvSpec mountain_car_continuous();
  static EnvSpec acrobot();
  static EnvSpec pointmaze(RewardFamily reward);

  std::string name() const;
};

struct Action {
  int index = 0;               // discrete environments
  std::vector<double> values;  // continuous environments
};

struct Transition {
  std::span<const double> next_state;
  double reward = 0.0;
  bool done = false;
};

// Episodic environment. reset(seed) starts a new episode whose randomness is
// fully determined by the seed; step() may only be called while !done().
// Instances share no state, so any number may run concurrently.
class Env {
 public:
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  std::span<const double> reset(std::uint64_t seed);
  Transition step(const Action& action);

  bool done() const { return done_; }
  std::span<const double> observation() const { return obs_; }

 protected:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) {}

  virtual void do_reset() = 0;
  // Returns the step reward; sets `terminal` when the episode ends early.
  virtual double do_step(const Action& action, bool& terminal) = 0;

  Rng rng_{0};
  std::vector<double> obs_;

 private:
  EnvSpec spec_;
  int steps_ = 0;
  bool done_ = true;
};

// Validates the spec and constructs a fresh instance.
std::unique_ptr<Env> make_env(const EnvSpec& spec);

// Deterministic edge map of the multi-step MDP. States are numbered 1..5,
// actions 1..2; the reward is granted on arrival at the state rewarded for
// horizon T (s2 for T=1, s4 for T=2, s5 for T=3).
std::pair<int, double> synthetic_step(int state_id, int action_id, int T);

// Feature vector of synthetic state `state_id` (3 components).
std::vector<double> synthetic_state_vector(int state_id);

// Goal-distance reward families. `s` and `goal` must have equal size.
double shaped_reward(const RewardFamily& family, std::span<const double> s,
                     std::span<const double> goal);

// Pointmaze geometry constants, exposed for documentation and tests.
namespace pointmaze_geometry {
inline constexpr double kWorldMin = 0.0;
inline constexpr double kWorldMax = 3.0;
// Inner wall slab attached to the left outer wall.
inline constexpr double kWallXMin = 0.0;
inline constexpr double kWallXMax = 2.0;
inline constexpr double kWallYMin = 1.25;
inline constexpr double kWallYMax = 1.75;
inline constexpr double kStartX = 0.5;
inline constexpr double kStartY = 0.5;
inline constexpr double kGoalX = 0.5;
inline constexpr double kGoalY = 2.5;
}  // namespace pointmaze_geometry

}  // namespace picap
