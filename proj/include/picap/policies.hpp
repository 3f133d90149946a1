#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "picap/environments.hpp"
#include "picap/rng.hpp"

namespace picap {

struct ArchitectureSpec {
  std::vector<int> hidden_layers;  // empty = linear policy
  bool use_bias = true;

  std::string label() const;
  bool operator==(const ArchitectureSpec&) const = default;
};

struct PriorSpec {
  enum class Family { gaussian, uniform, xavier_normal, xavier_uniform };
  Family family = Family::gaussian;
  double mu = 0.0;                 // gaussian mean, broadcast
  std::vector<double> mu_vector;   // optional per-parameter mean
  double sigma = 1.0;              // gaussian std

  static PriorSpec gaussian(double mu = 0.0, double sigma = 1.0);
  static PriorSpec uniform();
  static PriorSpec xavier_normal();
  static PriorSpec xavier_uniform();

  std::string label() const;
  bool operator==(const PriorSpec&) const = default;
};

std::string to_string(PriorSpec::Family family);
PriorSpec::Family prior_family_from_string(const std::string& name);

struct PolicySpec {
  enum class Kind { mlp, tabular_sigmoid };
  Kind kind = Kind::mlp;
  ArchitectureSpec arch;
  PriorSpec prior;

  static PolicySpec mlp(ArchitectureSpec arch, PriorSpec prior);
  static PolicySpec tabular_sigmoid(PriorSpec prior = PriorSpec::gaussian());

  std::string label() const;
  bool operator==(const PolicySpec&) const = default;
};

struct ParameterVector {
  std::vector<double> values;
};

// Flat parameter count of an MLP: sum over layers of
// fan_in * fan_out + fan_out * [use_bias].
std::int64_t param_count(const ArchitectureSpec& arch, int state_dim,
                         const ActionSpace& action_space);
std::int64_t param_count(const PolicySpec& spec, int state_dim,
                         const ActionSpace& action_space);

// One i.i.d. draw from the prior; deterministic given the stream state.
ParameterVector sample_params(const PolicySpec& spec, int state_dim,
                              const ActionSpace& action_space, Rng& rng);

// Maps (theta, state) to an action. MLP policies are deterministic
// (argmax readout for discrete, tanh-rescaled for continuous); the
// tabular sigmoid policy draws a1 with probability sigmoid(theta . state).
// act() is thread-safe; scratch buffers are thread-local.
class PolicyEvaluator {
 public:
  PolicyEvaluator(PolicySpec spec, int state_dim, ActionSpace action_space);

  std::int64_t param_count() const { return param_count_; }
  const PolicySpec& spec() const { return spec_; }

  void act(std::span<const double> theta, std::span<const double> state,
           Rng& rng, Action& out) const;

 private:
  void forward_mlp(std::span<const double> theta, std::span<const double> state,
                   Action& out) const;

  PolicySpec spec_;
  int state_dim_;
  ActionSpace action_space_;
  std::vector<int> dims_;  // layer widths: state_dim, hidden..., out
  std::int64_t param_count_ = 0;
};

double sigmoid(double x);

// The 7 x 4 x 2 bag: ([] + [1,2] layers x [4,32,64] units) x
// (gaussian, uniform, xavier normal, xavier uniform) x (bias, no bias).
std::vector<PolicySpec> architecture_bag();

}  // namespace picap
