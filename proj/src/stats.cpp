#include "picap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace picap {

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction stalled");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("incomplete beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, std::int64_t dof) {
  if (dof < 1) throw std::invalid_argument("student t: dof must be >= 1");
  const double nu = static_cast<double>(dof);
  const double x = nu / (nu + t * t);
  return regularized_incomplete_beta(nu / 2.0, 0.5, x);
}

CorrelationResult pearson(std::span<const double> xs,
                          std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("pearson: length mismatch");
  const std::int64_t n = static_cast<std::int64_t>(xs.size());
  if (n < 3) throw std::invalid_argument("pearson: needs n >= 3");

  double mx = 0.0, my = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    mx += xs[static_cast<std::size_t>(i)];
    my += ys[static_cast<std::size_t>(i)];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double dx = xs[static_cast<std::size_t>(i)] - mx;
    const double dy = ys[static_cast<std::size_t>(i)] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("pearson: degenerate variance");

  CorrelationResult res;
  res.n = n;
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(res.r) >= 1.0) {
    res.p_value = 0.0;
    return res;
  }
  const double t = res.r * std::sqrt((static_cast<double>(n) - 2.0) /
                                     (1.0 - res.r * res.r));
  res.p_value = student_t_two_sided_p(t, n - 2);
  return res;
}

std::vector<double> MetricTable::column(
    const std::string& name, const std::set<std::string>& exclude) const {
  const auto it = values.find(name);
  if (it == values.end())
    throw std::invalid_argument("metric table: unknown column '" + name + "'");
  if (exclude.empty()) return it->second;
  std::vector<double> out;
  for (std::size_t i = 0; i < environments.size(); ++i)
    if (!exclude.contains(environments[i])) out.push_back(it->second[i]);
  return out;
}

MetricTable ingest_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metric table " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("metric table is empty: " + path);
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "environment")
    throw std::runtime_error("metric table: first column must be 'environment'");

  MetricTable table;
  for (std::size_t c = 1; c < header.size(); ++c) {
    table.metric_columns.push_back(header[c]);
    table.values[header[c]] = {};
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("metric table: row width mismatch in " + path);
    table.environments.push_back(fields.front());
    for (std::size_t c = 1; c < header.size(); ++c) {
      try {
        table.values[header[c]].push_back(std::stod(fields[c]));
      } catch (const std::exception&) {
        throw std::runtime_error("metric table: bad number '" + fields[c] +
                                 "' in column " + header[c]);
      }
    }
  }
  if (table.environments.empty())
    throw std::runtime_error("metric table has no rows: " + path);
  return table;
}

std::vector<CorrelationEntry> correlate_all(
    const MetricTable& table, const std::set<std::string>& exclude) {
  for (const auto& name : exclude)
    if (std::find(table.environments.begin(), table.environments.end(),
                  name) == table.environments.end())
      throw std::invalid_argument("correlate_all: unknown environment '" +
                                  name + "'");
  std::vector<CorrelationEntry> entries;
  for (const std::string target : {"score_a", "score_r"}) {
    const auto score = table.column(target, exclude);
    for (const auto& metric : table.metric_columns) {
      if (metric == target) continue;  // the other score column stays in
      entries.push_back(
          {metric, target, pearson(table.column(metric, exclude), score)});
    }
  }
  return entries;
}

}  // namespace picap
