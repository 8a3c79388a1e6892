#pragma once

#include "pathsmooth/smoother.hpp"

#include <functional>
#include <memory>

namespace pathsmooth {

struct GradSpec {
  enum class Mode { finite_difference, analytic };
  Mode mode = Mode::finite_difference;
  /// Central differences with h_i = rel_step * max(1, |theta_i|).
  double rel_step = 1e-4;
  /// Coordinates to differentiate; empty means all. Others stay 0.
  std::vector<int> mask;

  bool active(int i) const;
};

/// Score of theta via Fisher's identity: s_k = grad [log p(x'_k | x_{k-1}) + log g(y_k | ...)]
/// at frozen auxiliary noise (Z, J).
class ScoreFunctional final : public AdditiveFunctional {
 public:
  ScoreFunctional(int dim_theta, GradSpec grad) : dim_(dim_theta), grad_(std::move(grad)) {}

  int dim() const override { return dim_; }
  Vector initial(const Dynamics& dyn, const Vector& theta, const Vector& x0, const Vector* y0) const override;
  void particle_term(const Dynamics& dyn, const Vector& theta, const StepContext& ctx, const Particle& cur,
                     Eigen::Ref<Vector> out) const override;
  double pair(const Dynamics& dyn, const Vector& theta, const StepContext& ctx, const Particle& prev,
              const Particle& cur, Eigen::Ref<Vector> s) const override;

  const GradSpec& grad() const { return grad_; }

  /// Returns f(theta) and writes its gradient over the active coordinates.
  double differentiate(const Dynamics& dyn, const Vector& theta, const std::function<double(const Vector&)>& f,
                       const std::function<Dual(const ParamVector<Dual>&)>& fd, Eigen::Ref<Vector> out) const;

 private:

  int dim_;
  GradSpec grad_;
};

std::unique_ptr<ScoreFunctional> make_score_functional(const Dynamics& dyn, GradSpec grad = {});

/// One score increment for a single (x_{k-1}, x'_k) pair. Without ctx.y only
/// the transition density is differentiated.
Vector score_increment(const ModelPtr& model, const Vector& theta, const StepContext& ctx, const Vector& x_prev,
                       const AugmentedTransition& aug, const GradSpec& grad = {},
                       DensityScheme scheme = DensityScheme::euler_ratio);

struct AdamState {
  Vector m;
  Vector v;
  long n = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double alpha = 0.001;
  double eps = 1e-8;
};

AdamState make_adam(int dim);

/// ADAM on c_n (a descent direction, here minus the score increment).
/// Returns the additive step and advances the state.
Vector adam_update(AdamState& state, const Vector& c);

/// Map between theta and the unconstrained coordinates the optimiser moves
/// in: log for positive parameters, identity otherwise (periodic ones are
/// wrapped after each update).
Vector to_unconstrained(const SdeModel& model, const Vector& theta);
Vector from_unconstrained(const SdeModel& model, const Vector& u);
/// d theta / d u per coordinate.
Vector unconstrained_jacobian(const SdeModel& model, const Vector& theta);

struct FitConfig {
  enum class Optimizer { adam, robbins_monro };
  SmootherConfig smoother;
  Construct construct = Construct::continuous;
  int grid = 10;
  double dt = 1.0;
  DensityScheme scheme = DensityScheme::euler_ratio;
  GradSpec grad;
  Optimizer optimizer = Optimizer::adam;
  AdamState adam;  // hyperparameters; moments are reset at start
  double gamma0 = 0.01;
  double divergence_bound = 1e6;
  /// Called after every update with (n, theta_n, loglik increment).
  std::function<void(int, const Vector&, double)> on_step;
};

struct FitResult {
  std::vector<Vector> trajectory;  // theta_0 .. theta_n
  std::vector<double> increments;  // log p(y_n | y_{0:n-1}) proxies
  double loglik = 0.0;
  FilterState final_state;
  std::vector<std::string> warnings;
};

/// Online gradient ascent driven by forward-only smoothing of the score.
FitResult online_gradient_ascent(const ModelPtr& model, const std::vector<Vector>& ys, const Vector& theta0,
                                 const FitConfig& config);

}  // namespace pathsmooth
