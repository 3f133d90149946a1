#include "picap/environments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace picap {

namespace {

constexpr double kPi = std::numbers::pi;

double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

double wrap_angle(double x) {
  // Wrap into [-pi, pi).
  x = std::fmod(x + kPi, 2.0 * kPi);
  if (x < 0) x += 2.0 * kPi;
  return x - kPi;
}

[[noreturn]] void spec_error(const std::string& what) {
  throw std::invalid_argument("env spec: " + what);
}

}  // namespace

std::string to_string(EnvId id) {
  switch (id) {
    case EnvId::synthetic: return "synthetic";
    case EnvId::cartpole: return "cartpole";
    case EnvId::pendulum: return "pendulum";
    case EnvId::mountain_car: return "mountain_car";
    case EnvId::mountain_car_continuous: return "mountain_car_continuous";
    case EnvId::acrobot: return "acrobot";
    case EnvId::pointmaze: return "pointmaze";
  }
  spec_error("unknown env id");
}

EnvId env_id_from_string(const std::string& name) {
  if (name == "synthetic") return EnvId::synthetic;
  if (name == "cartpole") return EnvId::cartpole;
  if (name == "pendulum") return EnvId::pendulum;
  if (name == "mountain_car") return EnvId::mountain_car;
  if (name == "mountain_car_continuous") return EnvId::mountain_car_continuous;
  if (name == "acrobot") return EnvId::acrobot;
  if (name == "pointmaze") return EnvId::pointmaze;
  spec_error("unknown env id '" + name + "'");
}

std::string to_string(RewardFamily::Kind kind) {
  switch (kind) {
    case RewardFamily::Kind::l1: return "l1";
    case RewardFamily::Kind::l2: return "l2";
    case RewardFamily::Kind::fraction: return "fraction";
    case RewardFamily::Kind::sparse: return "sparse";
  }
  spec_error("unknown reward family");
}

RewardFamily::Kind reward_kind_from_string(const std::string& name) {
  if (name == "l1") return RewardFamily::Kind::l1;
  if (name == "l2") return RewardFamily::Kind::l2;
  if (name == "fraction") return RewardFamily::Kind::fraction;
  if (name == "sparse") return RewardFamily::Kind::sparse;
  spec_error("unknown reward family '" + name + "'");
}

std::string RewardFamily::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::l1: os << "l1(alpha=" << alpha << ")"; break;
    case Kind::l2: os << "l2(alpha=" << alpha << ")"; break;
    case Kind::fraction:
      os << "fraction(beta=" << beta << ",gamma=" << gamma << ")";
      break;
    case Kind::sparse: os << "sparse(epsilon=" << epsilon << ")"; break;
  }
  return os.str();
}

ActionSpace ActionSpace::make_discrete(int n) {
  if (n < 2) spec_error("discrete action space needs n >= 2");
  ActionSpace a;
  a.kind = Kind::discrete;
  a.n = n;
  return a;
}

ActionSpace ActionSpace::make_continuous(std::vector<double> low,
                                         std::vector<double> high) {
  if (low.empty() || low.size() != high.size())
    spec_error("continuous action bounds must be non-empty and equal-sized");
  for (std::size_t i = 0; i < low.size(); ++i)
    if (!(low[i] < high[i])) spec_error("continuous bounds need low < high");
  ActionSpace a;
  a.kind = Kind::continuous;
  a.low = std::move(low);
  a.high = std::move(high);
  return a;
}

EnvSpec EnvSpec::synthetic(int T) {
  if (T < 1 || T > 3) spec_error("synthetic horizon T must be 1, 2, or 3");
  EnvSpec s;
  s.id = EnvId::synthetic;
  s.synthetic_horizon = T;
  s.horizon = T;
  s.state_dim = 3;
  s.action_space = ActionSpace::make_discrete(2);
  return s;
}

EnvSpec EnvSpec::cartpole(NoiseConfig noise) {
  if (noise.u_init < 0 || noise.u_dyn < 0)
    spec_error("cartpole noise half-widths must be non-negative");
  EnvSpec s;
  s.id = EnvId::cartpole;
  s.noise = noise;
  s.horizon = 200;
  s.state_dim = 4;
  s.action_space = ActionSpace::make_discrete(2);
  return s;
}

EnvSpec EnvSpec::pendulum() {
  EnvSpec s;
  s.id = EnvId::pendulum;
  s.horizon = 200;
  s.state_dim = 3;
  s.action_space = ActionSpace::make_continuous({-2.0}, {2.0});
  return s;
}

EnvSpec EnvSpec::mountain_car() {
  EnvSpec s;
  s.id = EnvId::mountain_car;
  s.horizon = 200;
  s.state_dim = 2;
  s.action_space = ActionSpace::make_discrete(3);
  return s;
}

EnvSpec EnvSpec::mountain_car_continuous() {
  EnvSpec s;
  s.id = EnvId::mountain_car_continuous;
  s.horizon = 999;
  s.state_dim = 2;
  s.action_space = ActionSpace::make_continuous({-1.0}, {1.0});
  return s;
}

EnvSpec EnvSpec::acrobot() {
  EnvSpec s;
  s.id = EnvId::acrobot;
  s.horizon = 500;
  s.state_dim = 6;
  s.action_space = ActionSpace::make_discrete(3);
  return s;
}

EnvSpec EnvSpec::pointmaze(RewardFamily reward) {
  if (reward.alpha <= 0 || reward.beta <= 0 || reward.gamma <= 0 ||
      reward.epsilon <= 0)
    spec_error("reward family hyper-parameters must be positive");
  EnvSpec s;
  s.id = EnvId::pointmaze;
  s.reward = std::move(reward);
  if (s.reward.goal.empty())
    s.reward.goal = {pointmaze_geometry::kGoalX, pointmaze_geometry::kGoalY};
  if (s.reward.goal.size() != 2) spec_error("pointmaze goal must be 2-d");
  s.horizon = 150;
  s.state_dim = 4;
  s.action_space = ActionSpace::make_continuous({-1.0, -1.0}, {1.0, 1.0});
  return s;
}

std::string EnvSpec::name() const {
  std::ostringstream os;
  os << to_string(id);
  if (id == EnvId::synthetic) os << "(T=" << synthetic_horizon << ")";
  if (id == EnvId::cartpole && (noise.u_init != 0.05 || noise.u_dyn != 0.0))
    os << "(u_init=" << noise.u_init << ",u_dyn=" << noise.u_dyn << ")";
  if (id == EnvId::pointmaze) os << "(" << reward.label() << ")";
  return os.str();
}

std::span<const double> Env::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  steps_ = 0;
  done_ = false;
  do_reset();
  return obs_;
}

Transition Env::step(const Action& action) {
  if (done_) throw std::logic_error("step() called on a finished episode");
  if (spec_.action_space.kind == ActionSpace::Kind::discrete) {
    if (action.index < 0 || action.index >= spec_.action_space.n)
      throw std::invalid_argument("discrete action index out of range");
  } else if (static_cast<int>(action.values.size()) !=
             spec_.action_space.dim()) {
    throw std::invalid_argument("continuous action dimension mismatch");
  }
  bool terminal = false;
  const double reward = do_step(action, terminal);
  ++steps_;
  done_ = terminal || steps_ >= spec_.horizon;
  return Transition{obs_, reward, done_};
}

std::pair<int, double> synthetic_step(int state_id, int action_id, int T) {
  if (state_id < 1 || state_id > 5)
    throw std::invalid_argument("synthetic state id out of range");
  if (action_id < 1 || action_id > 2)
    throw std::invalid_argument("synthetic action id out of range");
  // s3 and s5 absorb: the state freezes and nothing new is "arrived at".
  if (state_id == 3 || state_id == 5) return {state_id, 0.0};
  int next = state_id;
  switch (state_id) {
    case 1: next = (action_id == 1) ? 2 : 3; break;
    case 2: next = (action_id == 1) ? 2 : 4; break;
    case 4: next = (action_id == 1) ? 5 : 4; break;
    default: break;
  }
  const int rewarded = (T == 1) ? 2 : (T == 2) ? 4 : 5;
  const double reward = (next == rewarded) ? 1.0 : 0.0;
  return {next, reward};
}

std::vector<double> synthetic_state_vector(int state_id) {
  switch (state_id) {
    case 1: return {1, 0, 0};
    case 2: return {0, 1, 0};
    case 3: return {0, 0, 1};
    case 4: return {1, 1, 1};
    case 5: return {0, 0, 0};
  }
  throw std::invalid_argument("synthetic state id out of range");
}

double shaped_reward(const RewardFamily& family, std::span<const double> s,
                     std::span<const double> goal) {
  if (s.size() != goal.size())
    throw std::invalid_argument("shaped_reward: dimension mismatch");
  double l1 = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - goal[i];
    l1 += std::abs(d);
    sq += d * d;
  }
  const double l2 = std::sqrt(sq);
  switch (family.kind) {
    case RewardFamily::Kind::l1: return -family.alpha * l1;
    case RewardFamily::Kind::l2: return -family.alpha * l2;
    case RewardFamily::Kind::fraction: return family.beta / (family.gamma + l2);
    case RewardFamily::Kind::sparse: return (l2 >= family.epsilon) ? -1.0 : 0.0;
  }
  throw std::invalid_argument("unknown reward family");
}

namespace {

class SyntheticEnv final : public Env {
 public:
  explicit SyntheticEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(3);
  }

 private:
  void do_reset() override {
    state_ = 1;
    write_obs();
  }

  double do_step(const Action& action, bool&) override {
    const auto [next, reward] =
        synthetic_step(state_, action.index + 1, spec().synthetic_horizon);
    state_ = next;
    write_obs();
    return reward;
  }

  void write_obs() {
    const auto v = synthetic_state_vector(state_);
    std::copy(v.begin(), v.end(), obs_.begin());
  }

  int state_ = 1;
};

class CartPoleEnv final : public Env {
 public:
  explicit CartPoleEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(4);
  }

 private:
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kTotalMass = kMassCart + kMassPole;
  static constexpr double kLength = 0.5;  // half pole length
  static constexpr double kPoleMassLength = kMassPole * kLength;
  static constexpr double kForceMag = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kThetaThreshold = 12.0 * 2.0 * kPi / 360.0;
  static constexpr double kXThreshold = 2.4;

  void do_reset() override {
    const double u = spec().noise.u_init;
    for (auto& v : obs_) v = rng_.uniform(-u, u);
  }

  double do_step(const Action& action, bool& terminal) override {
    double x = obs_[0], x_dot = obs_[1], theta = obs_[2], theta_dot = obs_[3];
    const double force = (action.index == 1) ? kForceMag : -kForceMag;
    const double costheta = std::cos(theta);
    const double sintheta = std::sin(theta);
    const double temp =
        (force + kPoleMassLength * theta_dot * theta_dot * sintheta) /
        kTotalMass;
    const double thetaacc =
        (kGravity * sintheta - costheta * temp) /
        (kLength * (4.0 / 3.0 - kMassPole * costheta * costheta / kTotalMass));
    const double xacc =
        temp - kPoleMassLength * thetaacc * costheta / kTotalMass;

    x += kTau * x_dot;
    x_dot += kTau * xacc;
    theta += kTau * theta_dot;
    theta_dot += kTau * thetaacc;
    if (spec().noise.u_dyn > 0)
      theta_dot += rng_.uniform(-spec().noise.u_dyn, spec().noise.u_dyn);

    obs_ = {x, x_dot, theta, theta_dot};
    terminal = x < -kXThreshold || x > kXThreshold ||
               theta < -kThetaThreshold || theta > kThetaThreshold;
    return 1.0;  // survival reward, including the terminating step
  }
};

class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(3);
  }

 private:
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kDt = 0.05;
  static constexpr double kG = 10.0;
  static constexpr double kM = 1.0;
  static constexpr double kL = 1.0;

  void do_reset() override {
    theta_ = rng_.uniform(-kPi, kPi);
    theta_dot_ = rng_.uniform(-1.0, 1.0);
    write_obs();
  }

  double do_step(const Action& action, bool&) override {
    const double u = clip(action.values[0], -kMaxTorque, kMaxTorque);
    const double angle = wrap_angle(theta_);
    const double cost =
        angle * angle + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;

    double new_theta_dot =
        theta_dot_ + (-3.0 * kG / (2.0 * kL) * std::sin(theta_ + kPi) +
                      3.0 / (kM * kL * kL) * u) *
                         kDt;
    theta_ += new_theta_dot * kDt;
    theta_dot_ = clip(new_theta_dot, -kMaxSpeed, kMaxSpeed);
    write_obs();
    return -cost;
  }

  void write_obs() {
    obs_ = {std::cos(theta_), std::sin(theta_), theta_dot_};
  }

  double theta_ = 0.0, theta_dot_ = 0.0;
};

class MountainCarEnv final : public Env {
 public:
  explicit MountainCarEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(2);
  }

 private:
  static constexpr double kMinPos = -1.2;
  static constexpr double kMaxPos = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPos = 0.5;
  static constexpr double kForce = 0.001;
  static constexpr double kGravity = 0.0025;

  void do_reset() override {
    obs_[0] = rng_.uniform(-0.6, -0.4);
    obs_[1] = 0.0;
  }

  double do_step(const Action& action, bool& terminal) override {
    double position = obs_[0], velocity = obs_[1];
    velocity += (action.index - 1) * kForce +
                std::cos(3.0 * position) * (-kGravity);
    velocity = clip(velocity, -kMaxSpeed, kMaxSpeed);
    position += velocity;
    position = clip(position, kMinPos, kMaxPos);
    if (position <= kMinPos && velocity < 0) velocity = 0.0;
    obs_ = {position, velocity};
    terminal = position >= kGoalPos;
    return -1.0;
  }
};

class MountainCarContinuousEnv final : public Env {
 public:
  explicit MountainCarContinuousEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(2);
  }

 private:
  static constexpr double kMinPos = -1.2;
  static constexpr double kMaxPos = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPos = 0.45;
  static constexpr double kGoalVel = 0.0;
  static constexpr double kPower = 0.0015;

  void do_reset() override {
    obs_[0] = rng_.uniform(-0.6, -0.4);
    obs_[1] = 0.0;
  }

  double do_step(const Action& action, bool& terminal) override {
    double position = obs_[0], velocity = obs_[1];
    const double force = clip(action.values[0], -1.0, 1.0);
    velocity += force * kPower - 0.0025 * std::cos(3.0 * position);
    velocity = clip(velocity, -kMaxSpeed, kMaxSpeed);
    position += velocity;
    position = clip(position, kMinPos, kMaxPos);
    if (position <= kMinPos && velocity < 0) velocity = 0.0;
    obs_ = {position, velocity};
    const bool at_goal = position >= kGoalPos && velocity >= kGoalVel;
    terminal = at_goal;
    return -0.1 * force * force + (at_goal ? 100.0 : 0.0);
  }
};

class AcrobotEnv final : public Env {
 public:
  explicit AcrobotEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(6);
  }

 private:
  static constexpr double kDt = 0.2;
  static constexpr double kM1 = 1.0, kM2 = 1.0;
  static constexpr double kL1 = 1.0;
  static constexpr double kLc1 = 0.5, kLc2 = 0.5;
  static constexpr double kI1 = 1.0, kI2 = 1.0;
  static constexpr double kG = 9.8;
  static constexpr double kMaxVel1 = 4.0 * kPi;
  static constexpr double kMaxVel2 = 9.0 * kPi;

  using State4 = std::array<double, 4>;

  void do_reset() override {
    for (auto& v : s_) v = rng_.uniform(-0.1, 0.1);
    write_obs();
  }

  State4 derivatives(const State4& s, double torque) const {
    const double theta1 = s[0], theta2 = s[1];
    const double dtheta1 = s[2], dtheta2 = s[3];
    const double d1 =
        kM1 * kLc1 * kLc1 +
        kM2 * (kL1 * kL1 + kLc2 * kLc2 + 2 * kL1 * kLc2 * std::cos(theta2)) +
        kI1 + kI2;
    const double d2 = kM2 * (kLc2 * kLc2 + kL1 * kLc2 * std::cos(theta2)) + kI2;
    const double phi2 = kM2 * kLc2 * kG * std::cos(theta1 + theta2 - kPi / 2);
    const double phi1 =
        -kM2 * kL1 * kLc2 * dtheta2 * dtheta2 * std::sin(theta2) -
        2 * kM2 * kL1 * kLc2 * dtheta2 * dtheta1 * std::sin(theta2) +
        (kM1 * kLc1 + kM2 * kL1) * kG * std::cos(theta1 - kPi / 2) + phi2;
    const double ddtheta2 =
        (torque + d2 / d1 * phi1 -
         kM2 * kL1 * kLc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
        (kM2 * kLc2 * kLc2 + kI2 - d2 * d2 / d1);
    const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2};
  }

  double do_step(const Action& action, bool& terminal) override {
    const double torque = static_cast<double>(action.index - 1);

    // One RK4 step over [0, kDt].
    const State4 k1 = derivatives(s_, torque);
    const State4 k2 = derivatives(advanced(s_, k1, kDt / 2), torque);
    const State4 k3 = derivatives(advanced(s_, k2, kDt / 2), torque);
    const State4 k4 = derivatives(advanced(s_, k3, kDt), torque);
    for (int i = 0; i < 4; ++i)
      s_[i] += kDt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);

    s_[0] = wrap_angle(s_[0]);
    s_[1] = wrap_angle(s_[1]);
    s_[2] = clip(s_[2], -kMaxVel1, kMaxVel1);
    s_[3] = clip(s_[3], -kMaxVel2, kMaxVel2);
    write_obs();

    terminal = -std::cos(s_[0]) - std::cos(s_[1] + s_[0]) > 1.0;
    return terminal ? 0.0 : -1.0;
  }

  static State4 advanced(const State4& s, const State4& ds, double h) {
    return {s[0] + h * ds[0], s[1] + h * ds[1], s[2] + h * ds[2],
            s[3] + h * ds[3]};
  }

  void write_obs() {
    obs_ = {std::cos(s_[0]), std::sin(s_[0]), std::cos(s_[1]),
            std::sin(s_[1]), s_[2],           s_[3]};
  }

  State4 s_{};
};

// Point mass with damped double-integrator dynamics inside a U-shaped maze.
// The inner wall slab forces a detour to the right of the map to travel from
// the start (bottom left) to the goal (top left).
class PointmazeEnv final : public Env {
 public:
  explicit PointmazeEnv(EnvSpec spec) : Env(std::move(spec)) {
    obs_.resize(4);
  }

 private:
  static constexpr double kDt = 0.1;
  static constexpr double kAccel = 2.0;
  static constexpr double kDamping = 0.95;
  static constexpr double kMaxSpeed = 1.0;
  static constexpr double kResetNoise = 0.1;

  void do_reset() override {
    namespace geo = pointmaze_geometry;
    obs_[0] = geo::kStartX + rng_.uniform(-kResetNoise, kResetNoise);
    obs_[1] = geo::kStartY + rng_.uniform(-kResetNoise, kResetNoise);
    obs_[2] = 0.0;
    obs_[3] = 0.0;
  }

  double do_step(const Action& action, bool&) override {
    namespace geo = pointmaze_geometry;
    double x = obs_[0], y = obs_[1], vx = obs_[2], vy = obs_[3];
    vx = kDamping * (vx + kDt * kAccel * clip(action.values[0], -1.0, 1.0));
    vy = kDamping * (vy + kDt * kAccel * clip(action.values[1], -1.0, 1.0));
    vx = clip(vx, -kMaxSpeed, kMaxSpeed);
    vy = clip(vy, -kMaxSpeed, kMaxSpeed);

    // Axis-separated moves with collision clamping against the outer box and
    // the inner slab; the blocked velocity component is zeroed.
    double nx = x + kDt * vx;
    const bool in_slab_y = y > geo::kWallYMin && y < geo::kWallYMax;
    if (in_slab_y && x >= geo::kWallXMax && nx < geo::kWallXMax) {
      nx = geo::kWallXMax;
      vx = 0.0;
    }
    if (nx < geo::kWorldMin) { nx = geo::kWorldMin; vx = 0.0; }
    if (nx > geo::kWorldMax) { nx = geo::kWorldMax; vx = 0.0; }

    double ny = y + kDt * vy;
    const bool in_slab_x = nx < geo::kWallXMax;
    if (in_slab_x) {
      if (y <= geo::kWallYMin && ny > geo::kWallYMin) {
        ny = geo::kWallYMin;
        vy = 0.0;
      } else if (y >= geo::kWallYMax && ny < geo::kWallYMax) {
        ny = geo::kWallYMax;
        vy = 0.0;
      }
    }
    if (ny < geo::kWorldMin) { ny = geo::kWorldMin; vy = 0.0; }
    if (ny > geo::kWorldMax) { ny = geo::kWorldMax; vy = 0.0; }

    obs_ = {nx, ny, vx, vy};
    const std::array<double, 2> pos{nx, ny};
    return shaped_reward(spec().reward, pos, spec().reward.goal);
  }
};

void validate_against_canonical(const EnvSpec& spec, const EnvSpec& canon) {
  if (spec.horizon != canon.horizon)
    spec_error("horizon " + std::to_string(spec.horizon) + " does not match " +
               to_string(spec.id) + " (" + std::to_string(canon.horizon) + ")");
  if (spec.state_dim != canon.state_dim)
    spec_error("state_dim mismatch for " + to_string(spec.id));
  if (!(spec.action_space == canon.action_space))
    spec_error("action space mismatch for " + to_string(spec.id));
}

}  // namespace

std::unique_ptr<Env> make_env(const EnvSpec& spec) {
  switch (spec.id) {
    case EnvId::synthetic: {
      validate_against_canonical(spec, EnvSpec::synthetic(spec.synthetic_horizon));
      return std::make_unique<SyntheticEnv>(spec);
    }
    case EnvId::cartpole: {
      validate_against_canonical(spec, EnvSpec::cartpole(spec.noise));
      return std::make_unique<CartPoleEnv>(spec);
    }
    case EnvId::pendulum: {
      validate_against_canonical(spec, EnvSpec::pendulum());
      return std::make_unique<PendulumEnv>(spec);
    }
    case EnvId::mountain_car: {
      validate_against_canonical(spec, EnvSpec::mountain_car());
      return std::make_unique<MountainCarEnv>(spec);
    }
    case EnvId::mountain_car_continuous: {
      validate_against_canonical(spec, EnvSpec::mountain_car_continuous());
      return std::make_unique<MountainCarContinuousEnv>(spec);
    }
    case EnvId::acrobot: {
      validate_against_canonical(spec, EnvSpec::acrobot());
      return std::make_unique<AcrobotEnv>(spec);
    }
    case EnvId::pointmaze: {
      EnvSpec canon = EnvSpec::pointmaze(spec.reward);
      validate_against_canonical(spec, canon);
      return std::make_unique<PointmazeEnv>(std::move(canon));
    }
  }
  throw std::invalid_argument("make_env: unknown env id");
}

}  // namespace picap
