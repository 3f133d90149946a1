#include "picap/policies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace picap {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string ArchitectureSpec::label() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < hidden_layers.size(); ++i) {
    if (i) os << ",";
    os << hidden_layers[i];
  }
  os << "]" << (use_bias ? "+bias" : "");
  return os.str();
}

PriorSpec PriorSpec::gaussian(double mu, double sigma) {
  if (sigma <= 0) throw std::invalid_argument("gaussian prior needs sigma > 0");
  PriorSpec p;
  p.family = Family::gaussian;
  p.mu = mu;
  p.sigma = sigma;
  return p;
}

PriorSpec PriorSpec::uniform() {
  PriorSpec p;
  p.family = Family::uniform;
  return p;
}

PriorSpec PriorSpec::xavier_normal() {
  PriorSpec p;
  p.family = Family::xavier_normal;
  return p;
}

PriorSpec PriorSpec::xavier_uniform() {
  PriorSpec p;
  p.family = Family::xavier_uniform;
  return p;
}

std::string to_string(PriorSpec::Family family) {
  switch (family) {
    case PriorSpec::Family::gaussian: return "gaussian";
    case PriorSpec::Family::uniform: return "uniform";
    case PriorSpec::Family::xavier_normal: return "xavier_normal";
    case PriorSpec::Family::xavier_uniform: return "xavier_uniform";
  }
  throw std::invalid_argument("unknown prior family");
}

PriorSpec::Family prior_family_from_string(const std::string& name) {
  if (name == "gaussian") return PriorSpec::Family::gaussian;
  if (name == "uniform") return PriorSpec::Family::uniform;
  if (name == "xavier_normal") return PriorSpec::Family::xavier_normal;
  if (name == "xavier_uniform") return PriorSpec::Family::xavier_uniform;
  throw std::invalid_argument("unknown prior family '" + name + "'");
}

std::string PriorSpec::label() const {
  std::ostringstream os;
  os << to_string(family);
  if (family == Family::gaussian) os << "(" << mu << "," << sigma << ")";
  return os.str();
}

PolicySpec PolicySpec::mlp(ArchitectureSpec arch, PriorSpec prior) {
  for (int w : arch.hidden_layers)
    if (w <= 0) throw std::invalid_argument("hidden layer widths must be > 0");
  PolicySpec s;
  s.kind = Kind::mlp;
  s.arch = std::move(arch);
  s.prior = std::move(prior);
  return s;
}

PolicySpec PolicySpec::tabular_sigmoid(PriorSpec prior) {
  if (prior.family != PriorSpec::Family::gaussian &&
      prior.family != PriorSpec::Family::uniform)
    throw std::invalid_argument(
        "tabular_sigmoid supports gaussian or uniform priors only");
  PolicySpec s;
  s.kind = Kind::tabular_sigmoid;
  s.prior = std::move(prior);
  return s;
}

std::string PolicySpec::label() const {
  if (kind == Kind::tabular_sigmoid) return "tabular_sigmoid/" + prior.label();
  return "mlp" + arch.label() + "/" + prior.label();
}

namespace {

int output_dim(const ActionSpace& space) {
  return space.kind == ActionSpace::Kind::discrete ? space.n : space.dim();
}

std::vector<int> layer_dims(const ArchitectureSpec& arch, int state_dim,
                            const ActionSpace& space) {
  std::vector<int> dims;
  dims.push_back(state_dim);
  dims.insert(dims.end(), arch.hidden_layers.begin(),
              arch.hidden_layers.end());
  dims.push_back(output_dim(space));
  return dims;
}

}  // namespace

std::int64_t param_count(const ArchitectureSpec& arch, int state_dim,
                         const ActionSpace& action_space) {
  const auto dims = layer_dims(arch, state_dim, action_space);
  std::int64_t count = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    count += static_cast<std::int64_t>(dims[l]) * dims[l + 1];
    if (arch.use_bias) count += dims[l + 1];
  }
  return count;
}

std::int64_t param_count(const PolicySpec& spec, int state_dim,
                         const ActionSpace& action_space) {
  if (spec.kind == PolicySpec::Kind::tabular_sigmoid) return 3;
  return param_count(spec.arch, state_dim, action_space);
}

ParameterVector sample_params(const PolicySpec& spec, int state_dim,
                              const ActionSpace& action_space, Rng& rng) {
  ParameterVector theta;
  const std::int64_t count = param_count(spec, state_dim, action_space);
  theta.values.resize(static_cast<std::size_t>(count));

  const PriorSpec& prior = spec.prior;
  if (!prior.mu_vector.empty() &&
      prior.mu_vector.size() != theta.values.size())
    throw std::invalid_argument("prior mu_vector length mismatch");
  const auto mu_at = [&](std::size_t i) {
    return prior.mu_vector.empty() ? prior.mu : prior.mu_vector[i];
  };

  switch (prior.family) {
    case PriorSpec::Family::gaussian:
      for (std::size_t i = 0; i < theta.values.size(); ++i)
        theta.values[i] = mu_at(i) + prior.sigma * rng.normal();
      return theta;
    case PriorSpec::Family::uniform:
      for (auto& v : theta.values) v = rng.uniform(-1.0, 1.0);
      return theta;
    case PriorSpec::Family::xavier_normal:
    case PriorSpec::Family::xavier_uniform:
      break;
  }

  // Xavier variants: per-layer fan scaling on weights, biases left at zero.
  // The output layer is scaled like any hidden layer.
  if (spec.kind == PolicySpec::Kind::tabular_sigmoid)
    throw std::invalid_argument("xavier priors are undefined for tabular_sigmoid");
  const auto dims = layer_dims(spec.arch, state_dim, action_space);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    const double scale =
        prior.family == PriorSpec::Family::xavier_normal
            ? std::sqrt(2.0 / (fan_in + fan_out))
            : std::sqrt(6.0 / (fan_in + fan_out));
    for (int k = 0; k < fan_in * fan_out; ++k) {
      theta.values[offset++] =
          prior.family == PriorSpec::Family::xavier_normal
              ? scale * rng.normal()
              : rng.uniform(-scale, scale);
    }
    if (spec.arch.use_bias)
      for (int k = 0; k < fan_out; ++k) theta.values[offset++] = 0.0;
  }
  return theta;
}

PolicyEvaluator::PolicyEvaluator(PolicySpec spec, int state_dim,
                                 ActionSpace action_space)
    : spec_(std::move(spec)),
      state_dim_(state_dim),
      action_space_(std::move(action_space)) {
  if (spec_.kind == PolicySpec::Kind::tabular_sigmoid) {
    if (state_dim_ != 3 ||
        action_space_.kind != ActionSpace::Kind::discrete ||
        action_space_.n != 2)
      throw std::invalid_argument(
          "tabular_sigmoid pairs only with the synthetic environments");
    param_count_ = 3;
    return;
  }
  dims_ = layer_dims(spec_.arch, state_dim_, action_space_);
  param_count_ = picap::param_count(spec_.arch, state_dim_, action_space_);
}

void PolicyEvaluator::act(std::span<const double> theta,
                          std::span<const double> state, Rng& rng,
                          Action& out) const {
  if (static_cast<std::int64_t>(theta.size()) != param_count_)
    throw std::invalid_argument("parameter vector length mismatch");
  if (static_cast<int>(state.size()) != state_dim_)
    throw std::invalid_argument("state dimension mismatch");

  if (spec_.kind == PolicySpec::Kind::tabular_sigmoid) {
    const double z = theta[0] * state[0] + theta[1] * state[1] +
                     theta[2] * state[2];
    out.index = (rng.uniform01() < sigmoid(z)) ? 0 : 1;
    return;
  }
  forward_mlp(theta, state, out);
}

void PolicyEvaluator::forward_mlp(std::span<const double> theta,
                                  std::span<const double> state,
                                  Action& out) const {
  thread_local std::vector<double> a, b;
  a.assign(state.begin(), state.end());

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int fan_in = dims_[l], fan_out = dims_[l + 1];
    b.resize(static_cast<std::size_t>(fan_out));
    for (int o = 0; o < fan_out; ++o) {
      double acc = 0.0;
      const double* w = theta.data() + offset + static_cast<std::size_t>(o) * fan_in;
      for (int i = 0; i < fan_in; ++i) acc += w[i] * a[static_cast<std::size_t>(i)];
      b[static_cast<std::size_t>(o)] = acc;
    }
    offset += static_cast<std::size_t>(fan_in) * fan_out;
    if (spec_.arch.use_bias) {
      for (int o = 0; o < fan_out; ++o) b[static_cast<std::size_t>(o)] += theta[offset + o];
      offset += static_cast<std::size_t>(fan_out);
    }
    const bool last = (l + 2 == dims_.size());
    if (!last)
      for (auto& v : b) v = std::tanh(v);
    std::swap(a, b);
  }

  if (action_space_.kind == ActionSpace::Kind::discrete) {
    // Ties break toward the lowest index.
    int best = 0;
    for (int i = 1; i < action_space_.n; ++i)
      if (a[static_cast<std::size_t>(i)] > a[static_cast<std::size_t>(best)]) best = i;
    out.index = best;
    return;
  }
  const int dim = action_space_.dim();
  out.values.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    const double t = std::tanh(a[static_cast<std::size_t>(i)]);
    out.values[static_cast<std::size_t>(i)] =
        action_space_.low[static_cast<std::size_t>(i)] +
        (t + 1.0) / 2.0 *
            (action_space_.high[static_cast<std::size_t>(i)] -
             action_space_.low[static_cast<std::size_t>(i)]);
  }
}

std::vector<PolicySpec> architecture_bag() {
  const std::vector<std::vector<int>> layers = {
      {}, {4}, {32}, {64}, {4, 4}, {32, 32}, {64, 64}};
  const std::vector<PriorSpec> priors = {
      PriorSpec::gaussian(0.0, 1.0), PriorSpec::uniform(),
      PriorSpec::xavier_normal(), PriorSpec::xavier_uniform()};
  std::vector<PolicySpec> bag;
  bag.reserve(layers.size() * priors.size() * 2);
  for (const auto& hidden : layers)
    for (const auto& prior : priors)
      for (bool bias : {true, false})
        bag.push_back(PolicySpec::mlp({hidden, bias}, prior));
  return bag;
}

}  // namespace picap
