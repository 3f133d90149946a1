#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "picap/stats.hpp"

using namespace picap;

namespace {

// Numerical-integration oracle for the two-sided Student-t tail: Simpson's
// rule over the density on [-T, T].
double t_two_sided_oracle(double t, int dof) {
  t = std::abs(t);
  const double nu = dof;
  const double log_norm = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) -
                          0.5 * std::log(nu * std::numbers::pi);
  auto pdf = [&](double x) {
    return std::exp(log_norm - (nu + 1) / 2 * std::log1p(x * x / nu));
  };
  const int steps = 200000;
  const double h = 2 * t / steps;
  double acc = pdf(-t) + pdf(t);
  for (int i = 1; i < steps; ++i)
    acc += pdf(-t + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  const double inner = acc * h / 3.0;
  return 1.0 - inner;
}

}  // namespace

TEST_CASE("pearson worked examples") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> y{2, 4, 6};
  const CorrelationResult r = pearson(x, y);
  CHECK(r.r == doctest::Approx(1.0));
  CHECK(r.p_value == doctest::Approx(0.0));
  CHECK(r.n == 3);

  const std::vector<double> y2{1, 0, 1};
  const CorrelationResult r2 = pearson(x, y2);
  CHECK(r2.r == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r2.p_value == doctest::Approx(1.0));
}

TEST_CASE("pearson symmetry and affine invariance") {
  const std::vector<double> x{0.3, -1.2, 2.2, 0.9, -0.4};
  const std::vector<double> y{1.1, 0.2, 0.8, 2.0, -0.6};
  const CorrelationResult rxy = pearson(x, y);
  const CorrelationResult ryx = pearson(y, x);
  CHECK(rxy.r == doctest::Approx(ryx.r).epsilon(1e-15));
  CHECK(rxy.p_value == doctest::Approx(ryx.p_value).epsilon(1e-12));

  std::vector<double> ax(x.size()), nx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    ax[i] = 3.5 * x[i] + 2.0;
    nx[i] = -3.5 * x[i] + 2.0;
  }
  CHECK(pearson(ax, y).r == doctest::Approx(rxy.r).epsilon(1e-12));
  CHECK(pearson(nx, y).r == doctest::Approx(-rxy.r).epsilon(1e-12));
}

TEST_CASE("pearson validates inputs") {
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(pearson(two, two), std::invalid_argument);
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> flat{5, 5, 5};
  CHECK_THROWS_AS(pearson(x, flat), std::invalid_argument);
  const std::vector<double> longer{1, 2, 3, 4};
  CHECK_THROWS_AS(pearson(x, longer), std::invalid_argument);
}

TEST_CASE("incomplete beta edges and t-tail oracle") {
  CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK(regularized_incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37));

  for (int dof = 1; dof <= 8; ++dof)
    for (double t : {0.2, 0.7, 1.0, 2.0, 3.5})
      CHECK(student_t_two_sided_p(t, dof) ==
            doctest::Approx(t_two_sided_oracle(t, dof)).epsilon(1e-6));
}

TEST_CASE("bundled benchmark table reproduces the published correlations") {
  const MetricTable table =
      ingest_table(std::string(PICAP_DATA_DIR) + "/benchmark_metrics.csv");
  CHECK(table.environments.size() == 13);

  const auto poic = pearson(table.column("poic"), table.column("score_a"));
  CHECK(poic.r == doctest::Approx(0.807).epsilon(1.3e-3));
  CHECK(poic.p_value <= 0.01);
  CHECK(poic.p_value == doctest::Approx(0.001).epsilon(0.2));

  const auto variance =
      pearson(table.column("variance"), table.column("score_a"));
  CHECK(variance.r == doctest::Approx(0.372).epsilon(1.5e-3));

  const auto h_r = pearson(table.column("h_r"), table.column("score_a"));
  CHECK(h_r.r == doctest::Approx(-0.349).epsilon(3e-3));

  // outlier removal per the channel: drop the top-3 poic rows
  const std::set<std::string> drop{"CartPole", "Acrobot",
                                   "MountainCarContinuous"};
  const auto poic_trim =
      pearson(table.column("poic", drop), table.column("score_a", drop));
  CHECK(poic_trim.r == doctest::Approx(0.780).epsilon(1e-3));
  CHECK(poic_trim.n == 10);
}

TEST_CASE("correlate_all covers every metric column against both scores") {
  const MetricTable table =
      ingest_table(std::string(PICAP_DATA_DIR) + "/benchmark_metrics.csv");
  const auto entries = correlate_all(table);
  // 11 non-target columns x 2 targets
  CHECK(entries.size() == 22);
  bool found = false, found_scores = false;
  for (const auto& e : entries) {
    if (e.metric == "poic" && e.target == "score_a") {
      CHECK(e.result.r == doctest::Approx(0.807).epsilon(1.3e-3));
      found = true;
    }
    if (e.metric == "score_r" && e.target == "score_a") {
      CHECK(e.result.r == doctest::Approx(0.139).epsilon(5e-3));
      found_scores = true;
    }
  }
  CHECK(found);
  CHECK(found_scores);
  CHECK_THROWS_AS(correlate_all(table, {"NoSuchEnv"}), std::invalid_argument);
}

TEST_CASE("ingest_table validates the schema") {
  CHECK_THROWS(ingest_table("/nonexistent/table.csv"));
}
