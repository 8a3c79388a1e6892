#pragma once

#include "pathsmooth/types.hpp"

#include <functional>
#include <vector>

namespace pathsmooth {

/// log f(x' | x) of dX = t1 (t2 - X) dt + t3 dW over a lag `dt`. Small |t1|
/// switches to the series form so t1 -> 0 recovers Brownian motion.
double ou_exact_transition(const Vector& theta, double x, double xp, double dt);

/// Moments of X_s given X_0 = x and X_T = x' for the O-U process.
struct GaussianMoments {
  double mean = 0.0;
  double var = 0.0;
};
GaussianMoments ou_bridge_moments(const Vector& theta, double x, double xp, double s, double horizon);

/// x_k = A x_{k-1} + c + N(0, Q),  y_k = H x_k + N(0, R),  x_0 ~ N(m0, P0).
/// P0 = 0 is allowed (known start). When `observe_initial` is set the first
/// observation refers to x_0, otherwise observations start at x_1.
struct LinearGaussianModel {
  Matrix A, Q, H, R;
  Vector c, m0;
  Matrix P0;
  bool observe_initial = false;
};

struct KalmanResult {
  double loglik = 0.0;
  std::vector<Vector> filtered_mean;
  std::vector<Matrix> filtered_cov;
  std::vector<Vector> predicted_mean;
  std::vector<Matrix> predicted_cov;
};

/// Filter over states x_0 ... x_n, where n = ys.size() (or ys.size() - 1 when
/// the first observation is of x_0). Throws NumericalError on a
/// non-PD innovation covariance.
KalmanResult kalman_filter(const LinearGaussianModel& model, const std::vector<Vector>& ys);

struct SmootherResult {
  std::vector<Vector> mean;
  std::vector<Matrix> cov;
  /// cross[k] = Cov(x_k, x_{k+1} | y) for k = 0 .. n-1.
  std::vector<Matrix> cross;
};

SmootherResult rts_smoother(const LinearGaussianModel& model, const std::vector<Vector>& ys);

using LinearGaussianFamily = std::function<LinearGaussianModel(const Vector&)>;

struct LoglikAndScore {
  double loglik = 0.0;
  Vector score;
};

/// Exact log-likelihood and its central-difference gradient
/// (h_i = 1e-6 max(1, |theta_i|)).
LoglikAndScore kalman_loglik_and_score(const LinearGaussianFamily& family, const Vector& theta,
                                       const std::vector<Vector>& ys);

/// Dense evaluation of the same likelihood through the joint Gaussian law of
/// all observations. Cubic cost; for checking small problems only.
double dense_gaussian_loglik(const LinearGaussianModel& model, const std::vector<Vector>& ys);

/// O-U observed with Gaussian noise on a lag `dt`, x_0 = x0 known. With
/// euler_grid = 0 the exact transition is used, otherwise the Euler scheme
/// composed `euler_grid` times.
LinearGaussianFamily ou_linear_gaussian(double dt, double obs_sd, double x0, int euler_grid = 0);

/// Euler-ratio log density of an O-U bridge (x -> x' driven by Z on
/// `grid` steps) and its gradient in (theta1, theta2, theta3), by forward
/// sensitivities of the guided recursion. Independent of the AD and
/// finite-difference paths; used to check them.
struct ValueAndGradient {
  double value = 0.0;
  Vector gradient;
};
ValueAndGradient ou_bridge_logdensity_gradient(const Vector& theta, double x, double xp, double horizon,
                                               const Matrix& increments);

}  // namespace pathsmooth
