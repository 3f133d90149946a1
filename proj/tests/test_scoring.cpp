#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "picap/scoring.hpp"

using namespace picap;

namespace {

ReturnMatrix matrix_of(std::vector<std::vector<double>> rows) {
  ReturnMatrix m;
  m.n = static_cast<std::int64_t>(rows.size());
  m.m = static_cast<std::int64_t>(rows.front().size());
  for (const auto& row : rows)
    m.returns.insert(m.returns.end(), row.begin(), row.end());
  m.env_spec = EnvSpec::synthetic(1);
  m.policy_specs = {PolicySpec::tabular_sigmoid()};
  m.plan = {m.n, m.m, 1};
  m.recompute_extrema();
  return m;
}

}  // namespace

TEST_CASE("normalized score worked cases") {
  // cartpole noise-sweep row: (178.2 - 8.742) / (200 - 8.742)
  ScoreInputs in;
  in.r_ave = 178.2;
  in.r_min_rand = 8.742;
  in.r_max_rand = 180.0;
  in.r_max_algo = 200.0;
  CHECK(normalized_score(in) == doctest::Approx(0.886).epsilon(1e-3));

  in.r_ave = in.r_min_rand;
  CHECK(normalized_score(in) == doctest::Approx(0.0));
  in.r_ave = 200.0;
  CHECK(normalized_score(in) == doctest::Approx(1.0));

  ScoreInputs degenerate;
  degenerate.r_ave = 1.0;
  degenerate.r_min_rand = 1.0;
  degenerate.r_max_rand = 1.0;
  CHECK_THROWS_AS(normalized_score(degenerate), std::invalid_argument);
}

TEST_CASE("normalized score is monotone in r_ave and affine invariant") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    ScoreInputs in;
    in.r_min_rand = rng.uniform(-10, 0);
    in.r_max_rand = in.r_min_rand + rng.uniform(0.5, 10);
    in.r_max_algo = in.r_max_rand + rng.uniform(0, 5);
    in.r_ave = rng.uniform(in.r_min_rand, in.r_max_rand);

    ScoreInputs higher = in;
    higher.r_ave += 0.25;
    CHECK(normalized_score(higher) > normalized_score(in));

    const double a = rng.uniform(0.1, 4.0), b = rng.uniform(-5, 5);
    ScoreInputs scaled;
    scaled.r_ave = a * in.r_ave + b;
    scaled.r_min_rand = a * in.r_min_rand + b;
    scaled.r_max_rand = a * in.r_max_rand + b;
    scaled.r_max_algo = a * *in.r_max_algo + b;
    CHECK(normalized_score(scaled) ==
          doctest::Approx(normalized_score(in)).epsilon(1e-9));
  }
}

TEST_CASE("random sampling score") {
  const ReturnMatrix uniform01 = matrix_of({{0, 1}, {1, 0}});
  CHECK(random_sampling_score(uniform01) == doctest::Approx(0.5));

  const ReturnMatrix constant = matrix_of({{2, 2}, {2, 2}});
  CHECK_THROWS_AS(random_sampling_score(constant), std::invalid_argument);

  // synthetic T=2 at the reference sampling budget
  const ReturnMatrix m =
      collect_returns(EnvSpec::synthetic(2), PolicySpec::tabular_sigmoid(),
                      {1000, 1000, 3}, 2);
  CHECK(random_sampling_score(m) == doctest::Approx(0.253).epsilon(0.08));
}

TEST_CASE("bag runs are deterministic") {
  BagConfig bag;
  BagAlgorithm rs;
  rs.kind = BagAlgorithm::Kind::random_search;
  rs.candidates = 10;
  rs.search_episodes = 3;
  bag.algorithms = {rs};
  bag.seeds = 2;
  bag.eval_episodes = 20;
  const EnvSpec env = EnvSpec::synthetic(3);
  const PolicySpec policy = PolicySpec::tabular_sigmoid();
  const BagResult a = run_bag(env, policy, bag, 42, 1);
  const BagResult b = run_bag(env, policy, bag, 42, 2);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    CHECK(a.entries[i].mean_return == b.entries[i].mean_return);
  CHECK(a.r_ave_algo == b.r_ave_algo);
}

TEST_CASE("single-algorithm bag reports its own score as the average") {
  BagConfig bag;
  BagAlgorithm rs;
  rs.kind = BagAlgorithm::Kind::random_search;
  rs.candidates = 5;
  bag.algorithms = {rs};
  bag.seeds = 1;
  bag.eval_episodes = 10;
  const BagResult r =
      run_bag(EnvSpec::synthetic(2), PolicySpec::tabular_sigmoid(), bag, 7, 1);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.r_ave_algo == r.entries.front().mean_return);
  CHECK(r.r_max_algo == r.entries.front().mean_return);
}

TEST_CASE("bag on the synthetic MDP: es solves it, tiny random search lags") {
  BagConfig bag;
  BagAlgorithm rs;
  rs.kind = BagAlgorithm::Kind::random_search;
  rs.candidates = 8;
  rs.search_episodes = 8;
  BagAlgorithm es;
  es.kind = BagAlgorithm::Kind::es;
  es.population = 50;
  es.sigma = 1.0;
  es.learning_rate = 2.0;
  es.iterations = 150;
  es.search_episodes = 8;
  bag.algorithms = {rs, es};
  bag.seeds = 1;
  bag.eval_episodes = 100;

  const BagResult r =
      run_bag(EnvSpec::synthetic(3), PolicySpec::tabular_sigmoid(), bag, 11, 2);
  REQUIRE(r.entries.size() == 2);
  const double rs_score = r.entries[0].mean_return;
  const double es_score = r.entries[1].mean_return;
  CHECK(es_score == 1.0);
  CHECK(rs_score < es_score);
  CHECK(r.r_ave_algo > rs_score);
  CHECK(r.r_ave_algo < es_score);
  CHECK(r.r_max_algo == 1.0);
}

TEST_CASE("cem solves cartpole to the 200 cap") {
  BagConfig bag;
  BagAlgorithm cem;
  cem.kind = BagAlgorithm::Kind::cem;
  cem.population = 32;
  cem.elite_frac = 0.25;
  cem.iterations = 12;
  cem.search_episodes = 4;
  bag.algorithms = {cem};
  bag.seeds = 1;
  bag.eval_episodes = 50;
  const PolicySpec policy =
      PolicySpec::mlp({{}, false}, PriorSpec::gaussian(0.0, 1.0));
  const BagResult r = run_bag(EnvSpec::cartpole(), policy, bag, 5, 2);
  CHECK(r.r_max_algo == 200.0);
}

TEST_CASE("bag validation") {
  BagConfig empty;
  CHECK_THROWS_AS(
      run_bag(EnvSpec::synthetic(1), PolicySpec::tabular_sigmoid(), empty, 1, 1),
      std::invalid_argument);
  CHECK(default_bag().algorithms.size() == 5);
}
