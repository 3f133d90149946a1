#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "picap/rollout.hpp"

namespace picap {

// All entropies and mutual informations are in nats.
struct MetricsReport {
  double pic = 0.0;
  double h_r = 0.0;
  double h_r_given_theta = 0.0;
  double poic = 0.0;
  double h_o = 0.0;
  double h_o_given_theta = 0.0;
  double eta_star = 1.0;
  double normalized_variance = 0.0;
  double r_min = 0.0, r_max = 0.0;
  std::int64_t bins = 0;
  std::int64_t n = 0, m = 0;
  std::string env;
  std::string policy;
  std::uint64_t seed = 0;
};

// Equal-width histogram over [r_min, r_max]; values equal to r_max land in
// the last bin. Degenerate ranges put all mass in bin 0.
std::vector<double> histogram(std::span<const double> values, double r_min,
                              double r_max, std::int64_t bins);

// Shannon entropy of a probability vector, 0*log 0 := 0.
double entropy(std::span<const double> probs);

struct PicResult {
  double pic = 0.0;
  double h_r = 0.0;
  double h_r_given_theta = 0.0;
};

// Discretized mutual-information estimator. Marginal and every conditional
// histogram share the bin edges derived from the pooled extrema. Requires
// bins > M unless allow_small_bins.
PicResult estimate_pic(const ReturnMatrix& m, std::int64_t bins,
                       bool allow_small_bins = false);

struct PoicResult {
  double poic = 0.0;  // clamped at >= 0
  double h_o = 0.0;
  double h_o_given_theta = 0.0;
};

// Bernoulli-entropy estimator of the optimality mutual information at a
// fixed temperature. p(O=1|theta_i) is the per-particle mean of
// exp((r_ij - r_max_ref)/eta), evaluated through a log-domain reduction.
PoicResult estimate_poic_at(const ReturnMatrix& m, double eta,
                            double r_max_ref);

struct TemperatureGrid {
  double log10_lo = -6.0;  // eta = range * 10^k
  double log10_hi = 3.0;
  int points = 128;
};

struct TemperatureSearch {
  std::vector<std::pair<double, double>> evaluated;  // (eta, poic)
  double eta_star = 1.0;
  double poic_star = 0.0;
  PoicResult best;
};

// Log-spaced grid sweep in units of the return range, refined with a
// golden-section search around the best grid point. Deterministic given the
// matrix; degenerate matrices yield (eta_star=1, poic_star=0).
TemperatureSearch optimize_temperature(const ReturnMatrix& m,
                                       TemperatureGrid grid = {},
                                       std::optional<double> r_max_ref = {},
                                       int workers = 1);

// Population variance of all returns scaled by the return range.
double normalized_variance(const ReturnMatrix& m);

// Componentwise maxima of (pic, poic) across per-prior reports.
std::pair<double, double> channel_capacity(std::span<const MetricsReport> reports);

// Differential entropy of a normal distribution with std sigma.
double gaussian_entropy(double sigma);

// Misordering bound exp(-pi e N ((mu1-mu2)/(e^H1+e^H2))^2); H's are the
// conditional return entropies. mu's are swapped if needed.
double prop1_bound(double mu1, double mu2, double h1, double h2,
                   std::int64_t n);

struct Prop1Check {
  double empirical_rate = 0.0;
  double bound = 1.0;
  std::int64_t trials = 0;
};

// Monte Carlo check of the bound: samples N returns per policy from each
// Gaussian and counts how often the sample means contradict the true order.
Prop1Check verify_prop1(double mu1, double sigma1, double mu2, double sigma2,
                        std::int64_t n, std::int64_t trials,
                        std::uint64_t seed);

// Full report: PIC, temperature-optimized POIC (or a fixed eta override),
// normalized variance and extrema.
MetricsReport compute_metrics(const ReturnMatrix& m, std::int64_t bins,
                              std::optional<double> eta_override = {},
                              std::optional<double> r_max_ref = {},
                              bool allow_small_bins = false, int workers = 1);

}  // namespace picap
