#pragma once

#include "pathsmooth/model.hpp"

#include <limits>
#include <numbers>
#include <optional>
#include <string_view>

namespace pathsmooth {

/// Knobs shared by the built-in catalog. Unset fields take each model's
/// default.
struct ModelOptions {
  double jump_rate = 0.0;
  double jump_halfwidth = 0.5;
  std::optional<double> obs_sd;
  std::optional<double> x0;
};

/// dX = theta1 (theta2 - X) dt + theta3 dW + dJ, J compound Poisson with
/// rate `jump_rate` and U(-zeta, zeta) sizes; y = x + N(0, obs_sd^2).
class OrnsteinUhlenbeckModel final : public SdeModelAdapter<OrnsteinUhlenbeckModel> {
 public:
  explicit OrnsteinUhlenbeckModel(const ModelOptions& options = {});

  template <typename S>
  void drift_t(const ParamVector<S>& th, const State<S>& x, State<S>& out) const {
    out.resize(1);
    out(0) = th(0) * (th(1) - x(0));
  }
  template <typename S>
  void diffusion_t(const ParamVector<S>& th, const State<S>&, SquareMatrix<S>& out) const {
    out.resize(1, 1);
    out(0, 0) = th(2);
  }
  template <typename S>
  S obs_logdensity_t(const ParamVector<S>&, const Vector& y, const Vector*, const PathView<S>& path) const {
    const S r = S(y(0)) - path.states(path.states.rows() - 1, 0);
    return S(-0.5 * std::log(2.0 * std::numbers::pi * obs_sd_ * obs_sd_)) - r * r / (2.0 * obs_sd_ * obs_sd_);
  }

  bool has_jumps() const override { return rate_ > 0.0; }
  double jump_intensity(const ParamVector<double>&, double) const override { return rate_; }
  Dual jump_intensity(const ParamVector<Dual>&, double) const override { return Dual(rate_); }
  double intensity_bound(const Vector&, double) const override { return rate_; }
  double jump_size_logdensity(const ParamVector<double>&, const State<double>& size) const override;
  Dual jump_size_logdensity(const ParamVector<Dual>& theta, const State<double>& size) const override;
  Vector sample_jump_size(const Vector& theta, Rng& rng) const override;

  Vector sample_observation(const Vector& theta, const Vector* y_prev, const PathSegment& path,
                            Rng& rng) const override;
  Vector sample_initial(const Vector& theta, Rng& rng) const override;

  double obs_sd() const { return obs_sd_; }
  double jump_rate() const { return rate_; }
  double jump_halfwidth() const { return halfwidth_; }

 private:
  double rate_;
  double halfwidth_;
  double obs_sd_;
  double x0_;
};

/// dX = sin(X - theta1) dt + theta2 dW with theta1 in [0, 2 pi).
class PeriodicDriftModel final : public SdeModelAdapter<PeriodicDriftModel> {
 public:
  explicit PeriodicDriftModel(const ModelOptions& options = {});

  template <typename S>
  void drift_t(const ParamVector<S>& th, const State<S>& x, State<S>& out) const {
    using std::sin;
    out.resize(1);
    out(0) = sin(x(0) - th(0));
  }
  template <typename S>
  void diffusion_t(const ParamVector<S>& th, const State<S>&, SquareMatrix<S>& out) const {
    out.resize(1, 1);
    out(0, 0) = th(1);
  }
  template <typename S>
  S obs_logdensity_t(const ParamVector<S>&, const Vector& y, const Vector*, const PathView<S>& path) const {
    const S r = S(y(0)) - path.states(path.states.rows() - 1, 0);
    return S(-0.5 * std::log(2.0 * std::numbers::pi * obs_sd_ * obs_sd_)) - r * r / (2.0 * obs_sd_ * obs_sd_);
  }

  Vector sample_observation(const Vector& theta, const Vector* y_prev, const PathSegment& path,
                            Rng& rng) const override;
  Vector sample_initial(const Vector& theta, Rng& rng) const override;

 private:
  double obs_sd_;
  double x0_;
};

/// Heston stochastic volatility with the log-price integrated out given the
/// latent CIR path:
///   dX = theta1 (theta2 - X) dt + theta3 sqrt(X) dW,  X_0 = theta2,
///   y_i | y_{i-1}, X ~ N(y_{i-1} + int (theta4 - X/2) ds, int X ds).
/// The square root uses max(X, 0) (full truncation).
class HestonModel final : public SdeModelAdapter<HestonModel> {
 public:
  HestonModel();

  template <typename S>
  void drift_t(const ParamVector<S>& th, const State<S>& x, State<S>& out) const {
    out.resize(1);
    out(0) = th(0) * (th(1) - x(0));
  }
  template <typename S>
  void diffusion_t(const ParamVector<S>& th, const State<S>& x, SquareMatrix<S>& out) const {
    using std::sqrt;
    out.resize(1, 1);
    out(0, 0) = value_of(x(0)) > 0.0 ? S(th(2) * sqrt(x(0))) : S(0.0);
  }
  template <typename S>
  S obs_logdensity_t(const ParamVector<S>& th, const Vector& y, const Vector* y_prev,
                     const PathView<S>& path) const {
    using std::log;
    const auto steps = path.states.rows() - 1;
    S integral(0.0);
    for (Eigen::Index j = 0; j < steps; ++j) {
      const S xj = path.states(j, 0);
      if (value_of(xj) > 0.0) integral += xj * path.dt;
    }
    const double base = y_prev ? (*y_prev)(0) : 0.0;
    const S mean = S(base) + th(3) * (steps * path.dt) - 0.5 * integral;
    if (!(value_of(integral) > 0.0)) return S(-std::numeric_limits<double>::infinity());
    const S r = S(y(0)) - mean;
    return S(-0.5 * std::log(2.0 * std::numbers::pi)) - 0.5 * log(integral) - r * r / (2.0 * integral);
  }

  bool observation_uses_path() const override { return true; }
  Vector sample_observation(const Vector& theta, const Vector* y_prev, const PathSegment& path,
                            Rng& rng) const override;
  Vector sample_initial(const Vector& theta, Rng& rng) const override;

  /// Feller condition 2 theta1 theta2 > theta3^2.
  bool admissible(const Vector& theta) const override;
  /// Shrinks theta3 just inside the Feller boundary.
  Vector project(const Vector& theta) const override;
};

/// Short-rate family dX = b(X) dt + theta4 sqrt(X) dW with nested drifts
///   M1: t0 + t1 X,  M2: + t2^2 X^2,  M3: + t3 / X.
/// Parameters are stored densely: M1 (t0, t1, t4), M2 (t0, t1, t2, t4),
/// M3 (t0, t1, t2, t3, t4).
class ShortRateModel final : public SdeModelAdapter<ShortRateModel> {
 public:
  ShortRateModel(int variant, const ModelOptions& options = {});

  template <typename S>
  void drift_t(const ParamVector<S>& th, const State<S>& x, State<S>& out) const {
    out.resize(1);
    S b = th(0) + th(1) * x(0);
    if (variant_ >= 2) b += th(2) * th(2) * x(0) * x(0);
    if (variant_ >= 3) b += th(3) / x(0);
    out(0) = b;
  }
  template <typename S>
  void diffusion_t(const ParamVector<S>& th, const State<S>& x, SquareMatrix<S>& out) const {
    using std::sqrt;
    out.resize(1, 1);
    out(0, 0) = value_of(x(0)) > 0.0 ? S(th(th.size() - 1) * sqrt(x(0))) : S(0.0);
  }
  template <typename S>
  S obs_logdensity_t(const ParamVector<S>&, const Vector& y, const Vector*, const PathView<S>& path) const {
    const S r = S(y(0)) - path.states(path.states.rows() - 1, 0);
    return S(-0.5 * std::log(2.0 * std::numbers::pi * obs_sd_ * obs_sd_)) - r * r / (2.0 * obs_sd_ * obs_sd_);
  }

  Vector sample_observation(const Vector& theta, const Vector* y_prev, const PathSegment& path,
                            Rng& rng) const override;
  Vector sample_initial(const Vector& theta, Rng& rng) const override;

  int variant() const { return variant_; }

 private:
  int variant_;
  double obs_sd_;
  double x0_;
};

/// Names accepted by make_model: ou, periodic, heston, m1, m2, m3.
std::vector<std::string> builtin_model_names();

/// Throws ConfigError for unknown names.
ModelPtr make_model(std::string_view name, const ModelOptions& options = {});

/// Every built-in model with default options.
std::vector<ModelPtr> builtin_models();

}  // namespace pathsmooth
