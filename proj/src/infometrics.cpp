#include "picap/infometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace picap {

namespace {

// Bin index under shared equal-width edges; the top edge maps to the last bin.
inline std::int64_t bin_index(double v, double r_min, double inv_width,
                              std::int64_t bins) {
  const auto idx = static_cast<std::int64_t>((v - r_min) * inv_width);
  return std::clamp<std::int64_t>(idx, 0, bins - 1);
}

inline double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

inline double bernoulli_entropy(double p) {
  p = std::clamp(p, 0.0, 1.0);
  return -plogp(p) - plogp(1.0 - p);
}

// Order-canonical reduction: sorting first makes every metric bit-identical
// under particle/episode permutations of the return matrix.
double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

}  // namespace

std::vector<double> histogram(std::span<const double> values, double r_min,
                              double r_max, std::int64_t bins) {
  if (values.empty()) throw std::invalid_argument("histogram: empty values");
  if (bins < 2) throw std::invalid_argument("histogram: bins must be >= 2");
  if (r_min > r_max) throw std::invalid_argument("histogram: r_min > r_max");
  std::vector<double> probs(static_cast<std::size_t>(bins), 0.0);
  const double weight = 1.0 / static_cast<double>(values.size());
  if (r_min == r_max) {
    probs[0] = 1.0;
    return probs;
  }
  const double inv_width = static_cast<double>(bins) / (r_max - r_min);
  for (double v : values)
    probs[static_cast<std::size_t>(bin_index(v, r_min, inv_width, bins))] +=
        weight;
  return probs;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) h -= plogp(p);
  return h;
}

PicResult estimate_pic(const ReturnMatrix& m, std::int64_t bins,
                       bool allow_small_bins) {
  if (bins < 2) throw std::invalid_argument("estimate_pic: bins must be >= 2");
  if (bins <= m.m && !allow_small_bins)
    throw std::invalid_argument(
        "estimate_pic: bins must exceed M (pass allow_small_bins to override)");
  if (m.returns.empty()) throw std::invalid_argument("estimate_pic: empty matrix");

  if (m.r_min == m.r_max) return {0.0, 0.0, 0.0};

  const double inv_width = static_cast<double>(bins) / (m.r_max - m.r_min);
  const double n_total = static_cast<double>(m.n) * static_cast<double>(m.m);

  // Pooled counts for the marginal; per-particle counts through a touched-bin
  // scratch array so the cost is O(N*M) regardless of B.
  std::vector<std::int64_t> pooled(static_cast<std::size_t>(bins), 0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  std::vector<std::int64_t> touched;
  touched.reserve(static_cast<std::size_t>(m.m));

  std::vector<double> h_per_particle(static_cast<std::size_t>(m.n));
  const double inv_m = 1.0 / static_cast<double>(m.m);
  for (std::int64_t i = 0; i < m.n; ++i) {
    touched.clear();
    for (std::int64_t j = 0; j < m.m; ++j) {
      const auto b = bin_index(m.at(i, j), m.r_min, inv_width, bins);
      ++pooled[static_cast<std::size_t>(b)];
      if (counts[static_cast<std::size_t>(b)]++ == 0) touched.push_back(b);
    }
    std::sort(touched.begin(), touched.end());
    double h_i = 0.0;
    for (std::int64_t b : touched) {
      h_i -= plogp(static_cast<double>(counts[static_cast<std::size_t>(b)]) *
                   inv_m);
      counts[static_cast<std::size_t>(b)] = 0;
    }
    h_per_particle[static_cast<std::size_t>(i)] = h_i;
  }

  double h_r = 0.0;
  for (std::int64_t c : pooled)
    if (c > 0) h_r -= plogp(static_cast<double>(c) / n_total);

  const double h_cond = sorted_sum(h_per_particle) / static_cast<double>(m.n);
  return {h_r - h_cond, h_r, h_cond};
}

PoicResult estimate_poic_at(const ReturnMatrix& m, double eta,
                            double r_max_ref) {
  if (!(eta > 0.0)) throw std::invalid_argument("estimate_poic_at: eta must be > 0");
  if (m.returns.empty())
    throw std::invalid_argument("estimate_poic_at: empty matrix");
  if (r_max_ref < m.r_max)
    throw std::invalid_argument("estimate_poic_at: r_max_ref below observed max");

  const double inv_eta = 1.0 / eta;
  std::vector<double> p_per_particle(static_cast<std::size_t>(m.n));
  std::vector<double> h_per_particle(static_cast<std::size_t>(m.n));
  std::vector<double> row(static_cast<std::size_t>(m.m));
  for (std::int64_t i = 0; i < m.n; ++i) {
    const double* begin = m.returns.data() + i * m.m;
    std::copy(begin, begin + m.m, row.begin());
    if (!std::is_sorted(row.begin(), row.end()))
      std::sort(row.begin(), row.end());
    // Log-domain mean of exp((r - r_max_ref)/eta); the ascending row makes
    // the reduction canonical and sums the smallest terms first. All
    // exponents are <= 0 by the r_max_ref precondition.
    const double mx = (row.back() - r_max_ref) * inv_eta;
    double acc = 0.0;
    for (double v : row) acc += std::exp((v - r_max_ref) * inv_eta - mx);
    const double log_p = mx + std::log(acc / static_cast<double>(m.m));
    const double p_i = std::exp(log_p);
    p_per_particle[static_cast<std::size_t>(i)] = p_i;
    h_per_particle[static_cast<std::size_t>(i)] = bernoulli_entropy(p_i);
  }
  const double inv_n = 1.0 / static_cast<double>(m.n);
  const double h_o = bernoulli_entropy(sorted_sum(p_per_particle) * inv_n);
  const double h_cond = sorted_sum(h_per_particle) * inv_n;
  return {std::max(0.0, h_o - h_cond), h_o, h_cond};
}

TemperatureSearch optimize_temperature(const ReturnMatrix& m,
                                       TemperatureGrid grid,
                                       std::optional<double> r_max_ref,
                                       int workers) {
  TemperatureSearch search;
  const double range = m.r_max - m.r_min;
  if (!(range > 0.0)) {
    search.eta_star = 1.0;
    search.poic_star = 0.0;
    return search;
  }
  const double ref = r_max_ref.value_or(m.r_max);
  if (grid.points < 2)
    throw std::invalid_argument("optimize_temperature: grid needs >= 2 points");

  // Row-sorted copy: every probe then skips its canonicalizing sort.
  ReturnMatrix sorted = m;
  for (std::int64_t i = 0; i < sorted.n; ++i)
    std::sort(sorted.returns.begin() + i * sorted.m,
              sorted.returns.begin() + (i + 1) * sorted.m);

  const auto eta_at = [&](double k) { return range * std::pow(10.0, k); };
  std::vector<PoicResult> results(static_cast<std::size_t>(grid.points));
  std::vector<double> etas(static_cast<std::size_t>(grid.points));
  const double dk = (grid.log10_hi - grid.log10_lo) / (grid.points - 1);
  for (int t = 0; t < grid.points; ++t)
    etas[static_cast<std::size_t>(t)] = eta_at(grid.log10_lo + dk * t);
  parallel_for(grid.points, workers, [&](std::int64_t t) {
    results[static_cast<std::size_t>(t)] =
        estimate_poic_at(sorted, etas[static_cast<std::size_t>(t)], ref);
  });

  int best = 0;
  for (int t = 0; t < grid.points; ++t) {
    search.evaluated.emplace_back(etas[static_cast<std::size_t>(t)],
                                  results[static_cast<std::size_t>(t)].poic);
    if (results[static_cast<std::size_t>(t)].poic >
        results[static_cast<std::size_t>(best)].poic)
      best = t;
  }
  search.eta_star = etas[static_cast<std::size_t>(best)];
  search.poic_star = results[static_cast<std::size_t>(best)].poic;
  search.best = results[static_cast<std::size_t>(best)];

  // Golden-section refinement in log space around the best grid point.
  const double k_best = grid.log10_lo + dk * best;
  double lo = std::max(grid.log10_lo, k_best - dk);
  double hi = std::min(grid.log10_hi, k_best + dk);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto probe = [&](double k) {
    const double eta = eta_at(k);
    const PoicResult r = estimate_poic_at(sorted, eta, ref);
    search.evaluated.emplace_back(eta, r.poic);
    if (r.poic > search.poic_star) {
      search.poic_star = r.poic;
      search.eta_star = eta;
      search.best = r;
    }
    return r.poic;
  };
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = probe(c), fd = probe(d);
  for (int it = 0; it < 48 && (b - a) > 1e-10; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = probe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = probe(d);
    }
  }
  return search;
}

double normalized_variance(const ReturnMatrix& m) {
  const double range = m.r_max - m.r_min;
  if (!(range > 0.0)) return 0.0;
  std::vector<double> values = m.returns;
  const double mu = sorted_sum(values) / static_cast<double>(values.size());
  for (auto& v : values) v = (v - mu) * (v - mu);
  return sorted_sum(values) / static_cast<double>(values.size()) / range;
}

std::pair<double, double> channel_capacity(
    std::span<const MetricsReport> reports) {
  if (reports.empty())
    throw std::invalid_argument("channel_capacity: empty report list");
  double pic_cc = reports.front().pic;
  double poic_cc = reports.front().poic;
  for (const auto& r : reports) {
    pic_cc = std::max(pic_cc, r.pic);
    poic_cc = std::max(poic_cc, r.poic);
  }
  return {pic_cc, poic_cc};
}

double gaussian_entropy(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_entropy: sigma <= 0");
  return std::log(sigma * std::sqrt(2.0 * std::numbers::pi * std::numbers::e));
}

double prop1_bound(double mu1, double mu2, double h1, double h2,
                   std::int64_t n) {
  if (n < 1) throw std::invalid_argument("prop1_bound: n must be >= 1");
  if (mu1 < mu2) {
    std::swap(mu1, mu2);
    std::swap(h1, h2);
  }
  const double gap = mu1 - mu2;
  if (gap == 0.0) return 1.0;
  const double denom = std::exp(h1) + std::exp(h2);
  const double ratio = gap / denom;
  return std::exp(-std::numbers::pi * std::numbers::e *
                  static_cast<double>(n) * ratio * ratio);
}

Prop1Check verify_prop1(double mu1, double sigma1, double mu2, double sigma2,
                        std::int64_t n, std::int64_t trials,
                        std::uint64_t seed) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    throw std::invalid_argument("verify_prop1: sigmas must be > 0");
  if (n < 1 || trials < 1)
    throw std::invalid_argument("verify_prop1: n and trials must be >= 1");
  if (mu1 < mu2) {
    std::swap(mu1, mu2);
    std::swap(sigma1, sigma2);
  }
  Prop1Check check;
  check.trials = trials;
  check.bound =
      prop1_bound(mu1, mu2, gaussian_entropy(sigma1), gaussian_entropy(sigma2), n);
  std::int64_t misordered = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    Rng rng = derive_stream(seed, kStreamProp1, static_cast<std::uint64_t>(t));
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s1 += mu1 + sigma1 * rng.normal();
    for (std::int64_t k = 0; k < n; ++k) s2 += mu2 + sigma2 * rng.normal();
    if (s1 <= s2) ++misordered;
  }
  check.empirical_rate =
      static_cast<double>(misordered) / static_cast<double>(trials);
  return check;
}

MetricsReport compute_metrics(const ReturnMatrix& m, std::int64_t bins,
                              std::optional<double> eta_override,
                              std::optional<double> r_max_ref,
                              bool allow_small_bins, int workers) {
  MetricsReport report;
  report.bins = bins;
  report.n = m.n;
  report.m = m.m;
  report.r_min = m.r_min;
  report.r_max = m.r_max;
  report.env = m.env_spec.name();
  report.policy = m.policy_specs.size() == 1
                      ? m.policy_specs.front().label()
                      : "bag(" + std::to_string(m.policy_specs.size()) + ")";
  report.seed = m.plan.master_seed;
  report.normalized_variance = normalized_variance(m);

  const PicResult pic = estimate_pic(m, bins, allow_small_bins);
  report.pic = pic.pic;
  report.h_r = pic.h_r;
  report.h_r_given_theta = pic.h_r_given_theta;

  if (m.r_min == m.r_max) {
    report.eta_star = 1.0;
    return report;
  }
  if (eta_override) {
    const PoicResult poic =
        estimate_poic_at(m, *eta_override, r_max_ref.value_or(m.r_max));
    report.poic = poic.poic;
    report.h_o = poic.h_o;
    report.h_o_given_theta = poic.h_o_given_theta;
    report.eta_star = *eta_override;
    return report;
  }
  const TemperatureSearch search =
      optimize_temperature(m, {}, r_max_ref, workers);
  report.poic = search.poic_star;
  report.h_o = search.best.h_o;
  report.h_o_given_theta = search.best.h_o_given_theta;
  report.eta_star = search.eta_star;
  return report;
}

}  // namespace picap
