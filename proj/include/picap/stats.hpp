#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace picap {

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;  // two-sided
  std::int64_t n = 0;
};

// Sample Pearson correlation with the two-sided t-test p-value
// (t = r sqrt((n-2)/(1-r^2)), Student-t tail via the regularized
// incomplete beta function). Needs n >= 3 and non-zero variance.
CorrelationResult pearson(std::span<const double> xs,
                          std::span<const double> ys);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, std::int64_t dof);

// Published per-environment metric table ingested from CSV.
struct MetricTable {
  std::vector<std::string> environments;
  std::vector<std::string> metric_columns;  // preserves file order
  std::map<std::string, std::vector<double>> values;

  std::vector<double> column(const std::string& name,
                             const std::set<std::string>& exclude = {}) const;
};

// CSV schema: environment,score_a,score_r,poic,h_o,h_o_given_theta,pic,
// h_r,h_r_given_theta,variance,state_dim,action_dim,horizon
MetricTable ingest_table(const std::string& path);

struct CorrelationEntry {
  std::string metric;
  std::string target;  // score_a or score_r
  CorrelationResult result;
};

// Correlates every metric column against both normalized scores, optionally
// excluding rows (outlier removal).
std::vector<CorrelationEntry> correlate_all(
    const MetricTable& table, const std::set<std::string>& exclude = {});

}  // namespace picap
