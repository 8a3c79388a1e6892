#include "pathsmooth/models.hpp"

#include <algorithm>
#include <cmath>

namespace pathsmooth {

namespace {

ModelInfo ou_info() {
  return {"ou", 1, 1, {"theta1", "theta2", "theta3"},
          {ParamDomain::positive(), ParamDomain::unconstrained(), ParamDomain::positive()}};
}

Vector endpoint_gaussian_draw(const PathSegment& path, double sd, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector y = path.endpoint();
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += sd * normal(rng);
  return y;
}

}  // namespace

// --- Ornstein-Uhlenbeck -----------------------------------------------------

OrnsteinUhlenbeckModel::OrnsteinUhlenbeckModel(const ModelOptions& options)
    : SdeModelAdapter(ou_info()),
      rate_(options.jump_rate),
      halfwidth_(options.jump_halfwidth),
      obs_sd_(options.obs_sd.value_or(0.1)),
      x0_(options.x0.value_or(0.0)) {
  if (rate_ < 0.0 || halfwidth_ <= 0.0 || obs_sd_ <= 0.0) throw ConfigError("invalid O-U model options");
}

double OrnsteinUhlenbeckModel::jump_size_logdensity(const ParamVector<double>&, const State<double>& size) const {
  if (std::abs(size(0)) > halfwidth_) return -std::numeric_limits<double>::infinity();
  return -std::log(2.0 * halfwidth_);
}

Dual OrnsteinUhlenbeckModel::jump_size_logdensity(const ParamVector<Dual>&, const State<double>& size) const {
  return Dual(jump_size_logdensity(ParamVector<double>(), size));
}

Vector OrnsteinUhlenbeckModel::sample_jump_size(const Vector&, Rng& rng) const {
  std::uniform_real_distribution<double> unif(-halfwidth_, halfwidth_);
  return Vector::Constant(1, unif(rng));
}

Vector OrnsteinUhlenbeckModel::sample_observation(const Vector&, const Vector*, const PathSegment& path,
                                                  Rng& rng) const {
  return endpoint_gaussian_draw(path, obs_sd_, rng);
}

Vector OrnsteinUhlenbeckModel::sample_initial(const Vector&, Rng&) const { return Vector::Constant(1, x0_); }

// --- Periodic drift ---------------------------------------------------------

PeriodicDriftModel::PeriodicDriftModel(const ModelOptions& options)
    : SdeModelAdapter(ModelInfo{"periodic",
                                1,
                                1,
                                {"theta1", "theta2"},
                                {ParamDomain::periodic(0.0, 2.0 * std::numbers::pi), ParamDomain::positive()}}),
      obs_sd_(options.obs_sd.value_or(0.1)),
      x0_(options.x0.value_or(0.0)) {
  if (obs_sd_ <= 0.0) throw ConfigError("observation sd must be positive");
}

Vector PeriodicDriftModel::sample_observation(const Vector&, const Vector*, const PathSegment& path,
                                              Rng& rng) const {
  return endpoint_gaussian_draw(path, obs_sd_, rng);
}

Vector PeriodicDriftModel::sample_initial(const Vector&, Rng&) const { return Vector::Constant(1, x0_); }

// --- Heston -----------------------------------------------------------------

HestonModel::HestonModel()
    : SdeModelAdapter(ModelInfo{"heston",
                                1,
                                1,
                                {"theta1", "theta2", "theta3", "theta4"},
                                {ParamDomain::positive(), ParamDomain::positive(), ParamDomain::positive(),
                                 ParamDomain::positive()}}) {}

Vector HestonModel::sample_observation(const Vector& theta, const Vector* y_prev, const PathSegment& path,
                                       Rng& rng) const {
  const double dt = path.dt();
  double integral = 0.0;
  for (int j = 0; j < path.grid(); ++j) integral += std::max(path.states(j, 0), 0.0) * dt;
  const double base = y_prev ? (*y_prev)(0) : 0.0;
  std::normal_distribution<double> normal;
  const double mean = base + theta(3) * path.horizon - 0.5 * integral;
  return Vector::Constant(1, mean + std::sqrt(integral) * normal(rng));
}

Vector HestonModel::sample_initial(const Vector& theta, Rng&) const { return Vector::Constant(1, theta(1)); }

bool HestonModel::admissible(const Vector& theta) const {
  return 2.0 * theta(0) * theta(1) > theta(2) * theta(2);
}

Vector HestonModel::project(const Vector& theta) const {
  if (admissible(theta)) return theta;
  Vector out = theta;
  out(2) = std::sqrt(2.0 * theta(0) * theta(1) * (1.0 - 1e-6));
  return out;
}

// --- Short-rate family ------------------------------------------------------

namespace {

ModelInfo short_rate_info(int variant) {
  ModelInfo info{"m" + std::to_string(variant), 1, 1, {}, {}};
  info.param_names = {"theta0", "theta1"};
  if (variant >= 2) info.param_names.push_back("theta2");
  if (variant >= 3) info.param_names.push_back("theta3");
  info.param_names.push_back("theta4");
  info.domains.assign(info.param_names.size(), ParamDomain::unconstrained());
  info.domains.back() = ParamDomain::positive();
  return info;
}

}  // namespace

ShortRateModel::ShortRateModel(int variant, const ModelOptions& options)
    : SdeModelAdapter(short_rate_info(variant)),
      variant_(variant),
      obs_sd_(options.obs_sd.value_or(0.01)),
      x0_(options.x0.value_or(1.0)) {
  if (variant < 1 || variant > 3) throw ConfigError("short-rate variant must be 1, 2 or 3");
  if (obs_sd_ <= 0.0) throw ConfigError("observation sd must be positive");
}

Vector ShortRateModel::sample_observation(const Vector&, const Vector*, const PathSegment& path, Rng& rng) const {
  return endpoint_gaussian_draw(path, obs_sd_, rng);
}

Vector ShortRateModel::sample_initial(const Vector&, Rng&) const { return Vector::Constant(1, x0_); }

// --- Catalog ----------------------------------------------------------------

std::vector<std::string> builtin_model_names() { return {"ou", "periodic", "heston", "m1", "m2", "m3"}; }

ModelPtr make_model(std::string_view name, const ModelOptions& options) {
  if (name == "ou") return std::make_shared<OrnsteinUhlenbeckModel>(options);
  if (name == "periodic") return std::make_shared<PeriodicDriftModel>(options);
  if (name == "heston") return std::make_shared<HestonModel>();
  if (name == "m1") return std::make_shared<ShortRateModel>(1, options);
  if (name == "m2") return std::make_shared<ShortRateModel>(2, options);
  if (name == "m3") return std::make_shared<ShortRateModel>(3, options);
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

std::vector<ModelPtr> builtin_models() {
  std::vector<ModelPtr> out;
  for (const auto& n : builtin_model_names()) out.push_back(make_model(n));
  return out;
}

}  // namespace pathsmooth
