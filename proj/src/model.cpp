#include "pathsmooth/model.hpp"

#include <cmath>

namespace pathsmooth {

Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 * (keys.size() + 1));
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

bool ParamDomain::contains(double v) const {
  if (!std::isfinite(v)) return false;
  switch (kind) {
    case Kind::unconstrained:
      return true;
    case Kind::positive:
      return v > 0.0;
    case Kind::periodic:
      return v >= lower && v < upper;
  }
  return false;
}

double ParamDomain::wrap(double v) const {
  if (kind != Kind::periodic) return v;
  const double width = upper - lower;
  double r = std::fmod(v - lower, width);
  if (r < 0.0) r += width;
  if (r >= width) r = 0.0;
  return lower + r;
}

SdeModel::SdeModel(ModelInfo info) : info_(std::move(info)) {
  if (info_.dim_x < 1 || info_.dim_w < 1 || info_.dim_x > kMaxDim || info_.dim_w > kMaxDim) {
    throw ConfigError("model dimensions must lie in [1, kMaxDim]");
  }
  if (info_.domains.size() != info_.param_names.size()) {
    throw ConfigError("one parameter domain per parameter is required");
  }
  if (dim_theta() > kMaxParams) throw ConfigError("parameter dimension exceeds kMaxParams");
}

double SdeModel::jump_intensity(const ParamVector<double>&, double) const { return 0.0; }
Dual SdeModel::jump_intensity(const ParamVector<Dual>&, double) const { return Dual(0.0); }
double SdeModel::intensity_bound(const Vector&, double) const { return 0.0; }

double SdeModel::jump_size_logdensity(const ParamVector<double>&, const State<double>&) const {
  throw ConfigError("model '" + name() + "' has no jump component");
}
Dual SdeModel::jump_size_logdensity(const ParamVector<Dual>&, const State<double>&) const {
  throw ConfigError("model '" + name() + "' has no jump component");
}
Vector SdeModel::sample_jump_size(const Vector&, Rng&) const {
  throw ConfigError("model '" + name() + "' has no jump component");
}

template <typename Scalar>
Scalar SdeModel::integrated_intensity_impl(const ParamVector<Scalar>& theta, double horizon) const {
  if (!has_jumps()) return Scalar(0.0);
  if (constant_intensity()) return jump_intensity(theta, 0.0) * horizon;
  constexpr int kPanels = 64;
  const double h = horizon / kPanels;
  Scalar acc = jump_intensity(theta, 0.0) + jump_intensity(theta, horizon);
  for (int k = 1; k < kPanels; ++k) acc += jump_intensity(theta, k * h) * (k % 2 == 1 ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

double SdeModel::integrated_intensity(const ParamVector<double>& theta, double horizon) const {
  return integrated_intensity_impl(theta, horizon);
}
Dual SdeModel::integrated_intensity(const ParamVector<Dual>& theta, double horizon) const {
  return integrated_intensity_impl(theta, horizon);
}

bool SdeModel::admissible(const Vector&) const { return true; }

void check_parameters(const SdeModel& model, const Vector& theta) {
  if (theta.size() != model.dim_theta()) {
    throw ConfigError("model '" + model.name() + "' expects " + std::to_string(model.dim_theta()) +
                      " parameters, got " + std::to_string(theta.size()));
  }
  for (int i = 0; i < model.dim_theta(); ++i) {
    if (!model.info().domains[i].contains(theta(i))) {
      throw ConfigError("parameter " + model.info().param_names[i] + " = " + std::to_string(theta(i)) +
                        " is outside its domain");
    }
  }
}

}  // namespace pathsmooth
