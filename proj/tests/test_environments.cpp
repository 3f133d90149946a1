#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "picap/environments.hpp"
#include "picap/policies.hpp"

using namespace picap;

namespace {

std::pair<double, int> run_fixed(Env& env, std::uint64_t seed, int action_idx) {
  env.reset(seed);
  Action a;
  a.index = action_idx;
  double total = 0.0;
  int steps = 0;
  while (!env.done()) {
    total += env.step(a).reward;
    ++steps;
  }
  return {total, steps};
}

}  // namespace

TEST_CASE("make_env fills the published dimensions") {
  auto synth = make_env(EnvSpec::synthetic(3));
  CHECK(synth->spec().state_dim == 3);
  CHECK(synth->spec().action_space.kind == ActionSpace::Kind::discrete);
  CHECK(synth->spec().action_space.n == 2);
  CHECK(synth->spec().horizon == 3);

  auto cp = make_env(EnvSpec::cartpole({0.05, 0.0}));
  CHECK(cp->spec().state_dim == 4);
  CHECK(cp->spec().action_space.n == 2);
  CHECK(cp->spec().horizon == 200);

  RewardFamily l2;
  l2.kind = RewardFamily::Kind::l2;
  l2.alpha = 1.0;
  auto pm = make_env(EnvSpec::pointmaze(l2));
  CHECK(pm->spec().state_dim == 4);
  CHECK(pm->spec().action_space.kind == ActionSpace::Kind::continuous);
  CHECK(pm->spec().action_space.dim() == 2);
  CHECK(pm->spec().horizon == 150);

  CHECK(make_env(EnvSpec::pendulum())->spec().state_dim == 3);
  CHECK(make_env(EnvSpec::mountain_car())->spec().action_space.n == 3);
  CHECK(make_env(EnvSpec::mountain_car_continuous())->spec().horizon == 999);
  CHECK(make_env(EnvSpec::acrobot())->spec().state_dim == 6);
}

TEST_CASE("make_env rejects mismatched specs") {
  EnvSpec bad = EnvSpec::cartpole();
  bad.horizon = 100;
  CHECK_THROWS_AS(make_env(bad), std::invalid_argument);

  EnvSpec bad2 = EnvSpec::acrobot();
  bad2.action_space = ActionSpace::make_discrete(2);
  CHECK_THROWS_AS(make_env(bad2), std::invalid_argument);

  CHECK_THROWS_AS(EnvSpec::synthetic(4), std::invalid_argument);
  CHECK_THROWS_AS(EnvSpec::cartpole({-0.1, 0.0}), std::invalid_argument);
}

TEST_CASE("synthetic edge map") {
  CHECK(synthetic_step(1, 1, 1) == std::pair{2, 1.0});
  CHECK(synthetic_step(1, 2, 1) == std::pair{3, 0.0});
  CHECK(synthetic_step(1, 2, 2) == std::pair{3, 0.0});
  CHECK(synthetic_step(1, 2, 3) == std::pair{3, 0.0});
  CHECK(synthetic_step(2, 1, 1) == std::pair{2, 1.0});  // re-arrival at s2
  CHECK(synthetic_step(2, 2, 2) == std::pair{4, 1.0});
  CHECK(synthetic_step(2, 2, 3) == std::pair{4, 0.0});
  CHECK(synthetic_step(4, 1, 3) == std::pair{5, 1.0});
  CHECK(synthetic_step(4, 2, 3) == std::pair{4, 0.0});
  CHECK(synthetic_step(3, 1, 3) == std::pair{3, 0.0});  // absorbing
  CHECK(synthetic_step(5, 2, 3) == std::pair{5, 0.0});
  CHECK_THROWS_AS(synthetic_step(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(synthetic_step(1, 3, 1), std::invalid_argument);
}

TEST_CASE("synthetic state vectors") {
  CHECK(synthetic_state_vector(1) == std::vector<double>{1, 0, 0});
  CHECK(synthetic_state_vector(2) == std::vector<double>{0, 1, 0});
  CHECK(synthetic_state_vector(3) == std::vector<double>{0, 0, 1});
  CHECK(synthetic_state_vector(4) == std::vector<double>{1, 1, 1});
  CHECK(synthetic_state_vector(5) == std::vector<double>{0, 0, 0});
}

TEST_CASE("synthetic success rate matches the sigmoid-product oracle") {
  // T=2 success probability under theta is sigmoid(t1) * (1 - sigmoid(t2));
  // its mean over N(0, I) is 1/4. Monte Carlo over the analytic formula.
  Rng rng(77);
  double acc2 = 0.0, acc3 = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double t1 = rng.normal(), t2 = rng.normal(), t3 = rng.normal();
    acc2 += sigmoid(t1) * (1.0 - sigmoid(t2));
    acc3 += sigmoid(t1) * (1.0 - sigmoid(t2)) * sigmoid(t1 + t2 + t3);
  }
  CHECK(acc2 / n == doctest::Approx(0.25).epsilon(0.01));
  CHECK(acc3 / n == doctest::Approx(0.1256).epsilon(0.02));

  // The environment realizes the same probabilities: simulate episodes for a
  // handful of fixed parameter vectors and compare frequencies.
  auto env = make_env(EnvSpec::synthetic(2));
  const PolicyEvaluator policy(PolicySpec::tabular_sigmoid(), 3,
                               ActionSpace::make_discrete(2));
  Rng theta_rng(5);
  for (int rep = 0; rep < 4; ++rep) {
    const std::array<double, 3> theta{theta_rng.normal(), theta_rng.normal(),
                                      theta_rng.normal()};
    const double p_true = sigmoid(theta[0]) * (1.0 - sigmoid(theta[1]));
    int wins = 0;
    const int episodes = 20000;
    Action action;
    for (int e = 0; e < episodes; ++e) {
      auto obs = env->reset(static_cast<std::uint64_t>(e));
      Rng pol_rng(derive_seed(99, static_cast<std::uint64_t>(rep),
                              static_cast<std::uint64_t>(e)));
      double total = 0.0;
      while (!env->done()) {
        policy.act(theta, obs, pol_rng, action);
        const auto t = env->step(action);
        total += t.reward;
        obs = t.next_state;
      }
      wins += total > 0.5;
    }
    const double se = std::sqrt(p_true * (1 - p_true) / episodes);
    CHECK(std::abs(static_cast<double>(wins) / episodes - p_true) <
          5 * se + 1e-4);
  }
}

TEST_CASE("shaped reward families") {
  RewardFamily f;
  f.kind = RewardFamily::Kind::l2;
  f.alpha = 1.0;
  const std::vector<double> s{0, 0}, g{3, 4};
  CHECK(shaped_reward(f, s, g) == doctest::Approx(-5.0));

  f.kind = RewardFamily::Kind::fraction;
  f.beta = 0.1;
  f.gamma = 0.1;
  const std::vector<double> s2{0.4, 0.0}, g2{0.0, 0.0};
  CHECK(shaped_reward(f, s2, g2) == doctest::Approx(0.2));

  f.kind = RewardFamily::Kind::sparse;
  f.epsilon = 0.5;
  const std::vector<double> s3{0.3, 0.0};
  CHECK(shaped_reward(f, s3, g2) == 0.0);
  f.epsilon = 0.2;
  CHECK(shaped_reward(f, s3, g2) == -1.0);

  f.kind = RewardFamily::Kind::l1;
  f.alpha = 2.0;
  CHECK(shaped_reward(f, s, g) == doctest::Approx(-14.0));

  CHECK_THROWS_AS(shaped_reward(f, s, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("cartpole matches an independently written reference step") {
  // Hand-rolled pole-cart Euler integration, kept separate from the
  // implementation on purpose.
  auto ref_step = [](std::array<double, 4>& s, int action) {
    const double g = 9.8, mc = 1.0, mp = 0.1, mt = mc + mp, l = 0.5,
                 pml = mp * l, fm = 10.0, tau = 0.02;
    const double force = action == 1 ? fm : -fm;
    const double ct = std::cos(s[2]), st = std::sin(s[2]);
    const double temp = (force + pml * s[3] * s[3] * st) / mt;
    const double aacc =
        (g * st - ct * temp) / (l * (4.0 / 3.0 - mp * ct * ct / mt));
    const double xacc = temp - pml * aacc * ct / mt;
    s = {s[0] + tau * s[1], s[1] + tau * xacc, s[2] + tau * s[3],
         s[3] + tau * aacc};
  };

  auto env = make_env(EnvSpec::cartpole({0.05, 0.0}));
  auto obs = env->reset(314);
  std::array<double, 4> ref{obs[0], obs[1], obs[2], obs[3]};
  Action a;
  for (int t = 0; t < 50 && !env->done(); ++t) {
    a.index = t % 3 == 0 ? 1 : 0;
    const auto tr = env->step(a);
    ref_step(ref, a.index);
    for (int k = 0; k < 4; ++k) CHECK(tr.next_state[k] == ref[k]);
    CHECK(tr.reward == 1.0);
  }
}

TEST_CASE("cartpole with u_dyn=0 is bit-identical to the nominal env") {
  auto nominal = make_env(EnvSpec::cartpole({0.05, 0.0}));
  auto noisy = make_env(EnvSpec::cartpole({0.05, 0.0}));
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto o1 = nominal->reset(seed);
    auto o2 = noisy->reset(seed);
    for (int k = 0; k < 4; ++k) CHECK(o1[k] == o2[k]);
    Action a;
    while (!nominal->done()) {
      a.index = static_cast<int>((seed + (o1[2] > 0)) % 2);
      const auto t1 = nominal->step(a);
      const auto t2 = noisy->step(a);
      CHECK(t1.done == t2.done);
      for (int k = 0; k < 4; ++k) CHECK(t1.next_state[k] == t2.next_state[k]);
      o1 = t1.next_state;
    }
  }
}

TEST_CASE("cartpole dynamics noise perturbs only the angular velocity") {
  auto nominal = make_env(EnvSpec::cartpole({0.05, 0.0}));
  auto noisy = make_env(EnvSpec::cartpole({0.05, 0.1}));
  nominal->reset(9);
  noisy->reset(9);
  Action a;
  a.index = 1;
  const auto t1 = nominal->step(a);
  const auto t2 = noisy->step(a);
  for (int k = 0; k < 3; ++k) CHECK(t1.next_state[k] == t2.next_state[k]);
  CHECK(t1.next_state[3] != t2.next_state[3]);
  CHECK(std::abs(t1.next_state[3] - t2.next_state[3]) <= 0.1);
}

TEST_CASE("episodes are deterministic given (spec, seed, actions)") {
  for (const EnvSpec& spec :
       {EnvSpec::cartpole(), EnvSpec::pendulum(), EnvSpec::mountain_car(),
        EnvSpec::acrobot()}) {
    auto e1 = make_env(spec);
    auto e2 = make_env(spec);
    e1->reset(123);
    e2->reset(123);
    Action a;
    a.values = {0.3};
    int step = 0;
    while (!e1->done()) {
      a.index = step % std::max(spec.action_space.n, 1);
      const auto t1 = e1->step(a);
      const auto t2 = e2->step(a);
      CHECK(t1.reward == t2.reward);
      for (int k = 0; k < spec.state_dim; ++k)
        CHECK(t1.next_state[k] == t2.next_state[k]);
      ++step;
    }
    CHECK(e2->done());
  }
}

TEST_CASE("horizon caps every episode") {
  for (const EnvSpec& spec :
       {EnvSpec::synthetic(2), EnvSpec::pendulum(), EnvSpec::mountain_car()}) {
    auto env = make_env(spec);
    env->reset(5);
    Action a;
    a.values = {0.0};
    a.index = 0;
    int steps = 0;
    while (!env->done()) {
      env->step(a);
      ++steps;
    }
    CHECK(steps <= spec.horizon);
    CHECK_THROWS_AS(env->step(a), std::logic_error);
  }
}

TEST_CASE("return bounds under random play") {
  Rng rng(2024);
  auto cp = make_env(EnvSpec::cartpole());
  auto mc = make_env(EnvSpec::mountain_car());
  auto ab = make_env(EnvSpec::acrobot());
  for (int e = 0; e < 30; ++e) {
    for (Env* env : {cp.get(), mc.get(), ab.get()}) {
      env->reset(static_cast<std::uint64_t>(e));
      Action a;
      double total = 0.0;
      while (!env->done()) {
        a.index = static_cast<int>(
            rng.below(static_cast<std::uint64_t>(env->spec().action_space.n)));
        total += env->step(a).reward;
      }
      if (env == cp.get()) {
        CHECK(total >= 1.0);
        CHECK(total <= 200.0);
      } else if (env == mc.get()) {
        CHECK(total >= -200.0);
        CHECK(total <= 0.0);
      } else {
        CHECK(total >= -500.0);
        CHECK(total <= 0.0);
      }
    }
  }
}

TEST_CASE("synthetic returns are binary") {
  auto env = make_env(EnvSpec::synthetic(3));
  Rng rng(3);
  for (int e = 0; e < 500; ++e) {
    env->reset(static_cast<std::uint64_t>(e));
    Action a;
    double total = 0.0;
    while (!env->done()) {
      a.index = static_cast<int>(rng.below(2));
      total += env->step(a).reward;
    }
    CHECK((total == 0.0 || total == 1.0));
  }
}

TEST_CASE("mountain car that never reaches the goal returns -200") {
  auto env = make_env(EnvSpec::mountain_car());
  const auto [total, steps] = run_fixed(*env, 4, 1);  // zero-force action
  CHECK(total == -200.0);
  CHECK(steps == 200);
}

TEST_CASE("pendulum reward follows the quadratic cost at zero torque") {
  auto env = make_env(EnvSpec::pendulum());
  for (std::uint64_t seed : {1ULL, 7ULL, 42ULL}) {
    auto obs = env->reset(seed);
    const double phi = std::atan2(obs[1], obs[0]);
    const double phidot = obs[2];
    Action a;
    a.values = {0.0};
    const auto t = env->step(a);
    CHECK(t.reward ==
          doctest::Approx(-(phi * phi + 0.1 * phidot * phidot)).epsilon(1e-12));
    CHECK(t.reward <= 0.0);
  }
}

TEST_CASE("pendulum observation stays on the unit circle") {
  auto env = make_env(EnvSpec::pendulum());
  env->reset(8);
  Action a;
  a.values = {1.7};
  while (!env->done()) {
    const auto tr = env->step(a);
    CHECK(tr.next_state[0] * tr.next_state[0] +
              tr.next_state[1] * tr.next_state[1] ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(tr.next_state[2]) <= 8.0 + 1e-12);
  }
}

TEST_CASE("mountain car continuous rewards and termination") {
  auto env = make_env(EnvSpec::mountain_car_continuous());
  env->reset(3);
  Action a;
  a.values = {0.0};
  double total = 0.0;
  int steps = 0;
  while (!env->done()) {
    total += env->step(a).reward;
    ++steps;
  }
  CHECK(steps == 999);  // zero action never reaches the goal
  CHECK(total == 0.0);  // no action penalty at a = 0

  env->reset(3);
  a.values = {0.5};
  const auto t = env->step(a);
  CHECK(t.reward == doctest::Approx(-0.1 * 0.25));
}

TEST_CASE("acrobot hangs at rest without torque") {
  auto env = make_env(EnvSpec::acrobot());
  env->reset(6);
  Action a;
  a.index = 1;  // zero torque
  double total = 0.0;
  while (!env->done()) total += env->step(a).reward;
  CHECK(total == -500.0);  // never swings up
}

TEST_CASE("pointmaze walls block the direct path to the goal") {
  RewardFamily l2;
  l2.kind = RewardFamily::Kind::l2;
  auto env = make_env(EnvSpec::pointmaze(l2));
  auto obs = env->reset(11);
  CHECK(std::abs(obs[0] - pointmaze_geometry::kStartX) <= 0.1);
  CHECK(std::abs(obs[1] - pointmaze_geometry::kStartY) <= 0.1);

  // Push straight up: the inner slab stops the point at y = 1.25.
  Action a;
  a.values = {0.0, 1.0};
  double max_y = 0.0;
  while (!env->done()) {
    const auto tr = env->step(a);
    max_y = std::max(max_y, tr.next_state[1]);
    CHECK(tr.next_state[0] >= 0.0);
    CHECK(tr.next_state[1] <= 3.0);
  }
  CHECK(max_y == doctest::Approx(pointmaze_geometry::kWallYMin));

  // Push right: the outer wall stops the point at x = 3.
  env->reset(11);
  a.values = {1.0, 0.0};
  double max_x = 0.0;
  while (!env->done()) max_x = std::max(max_x, env->step(a).next_state[0]);
  CHECK(max_x == doctest::Approx(pointmaze_geometry::kWorldMax));
}

TEST_CASE("pointmaze rewards use the configured family on positions") {
  RewardFamily sparse;
  sparse.kind = RewardFamily::Kind::sparse;
  sparse.epsilon = 100.0;  // everything is inside: constant zero reward
  auto env = make_env(EnvSpec::pointmaze(sparse));
  env->reset(1);
  Action a;
  a.values = {0.4, -0.2};
  double total = 0.0;
  while (!env->done()) total += env->step(a).reward;
  CHECK(total == 0.0);

  RewardFamily l1;
  l1.kind = RewardFamily::Kind::l1;
  l1.alpha = 3.0;
  auto env2 = make_env(EnvSpec::pointmaze(l1));
  env2->reset(1);
  a.values = {0.0, 0.0};
  const auto t = env2->step(a);
  const double dist = std::abs(t.next_state[0] - pointmaze_geometry::kGoalX) +
                      std::abs(t.next_state[1] - pointmaze_geometry::kGoalY);
  CHECK(t.reward == doctest::Approx(-3.0 * dist).epsilon(1e-12));
}
