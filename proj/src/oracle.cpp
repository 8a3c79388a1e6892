#include "pathsmooth/oracle.hpp"

#include <cmath>
#include <numbers>

namespace pathsmooth {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// (1 - exp(-2 a dt)) / (2 a), continuous at a = 0
double ou_var_factor(double a, double dt) {
  const double z = 2.0 * a * dt;
  if (std::abs(z) < 1e-6) return dt * (1.0 - z / 2.0 + z * z / 6.0);
  return -std::expm1(-z) / (2.0 * a);
}

double mvn_logpdf(const Vector& r, const Matrix& S) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError("innovation covariance is not positive definite");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Vector w = llt.matrixL().solve(r);
  return -0.5 * (r.size() * kLog2Pi + logdet + w.squaredNorm());
}

}  // namespace

double ou_exact_transition(const Vector& theta, double x, double xp, double dt) {
  const double a = theta(0), mu = theta(1), s = theta(2);
  const double mean = mu + (x - mu) * std::exp(-a * dt);
  const double var = s * s * ou_var_factor(a, dt);
  const double r = xp - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - r * r / (2.0 * var);
}

GaussianMoments ou_bridge_moments(const Vector& theta, double x, double xp, double s, double horizon) {
  const double a = theta(0), mu = theta(1), sd = theta(2);
  // (X_s, X_T) jointly Gaussian given X_0 = x
  const double m_s = mu + (x - mu) * std::exp(-a * s);
  const double m_T = mu + (x - mu) * std::exp(-a * horizon);
  const double v_s = sd * sd * ou_var_factor(a, s);
  const double v_T = sd * sd * ou_var_factor(a, horizon);
  const double c = v_s * std::exp(-a * (horizon - s));
  return {m_s + c / v_T * (xp - m_T), v_s - c * c / v_T};
}

KalmanResult kalman_filter(const LinearGaussianModel& model, const std::vector<Vector>& ys) {
  KalmanResult out;
  Vector m = model.m0;
  Matrix P = model.P0;
  const int dx = static_cast<int>(m.size());

  auto update = [&](const Vector& y) {
    const Vector r = y - model.H * m;
    const Matrix S = model.H * P * model.H.transpose() + model.R;
    out.loglik += mvn_logpdf(r, S);
    const Matrix K = P * model.H.transpose() * S.inverse();
    m += K * r;
    P = (Matrix::Identity(dx, dx) - K * model.H) * P;
    P = 0.5 * (P + P.transpose());
  };

  std::size_t first = 0;
  out.predicted_mean.push_back(m);
  out.predicted_cov.push_back(P);
  if (model.observe_initial && !ys.empty()) {
    update(ys[0]);
    first = 1;
  }
  out.filtered_mean.push_back(m);
  out.filtered_cov.push_back(P);
  for (std::size_t k = first; k < ys.size(); ++k) {
    m = model.A * m + model.c;
    P = model.A * P * model.A.transpose() + model.Q;
    out.predicted_mean.push_back(m);
    out.predicted_cov.push_back(P);
    update(ys[k]);
    out.filtered_mean.push_back(m);
    out.filtered_cov.push_back(P);
  }
  return out;
}

SmootherResult rts_smoother(const LinearGaussianModel& model, const std::vector<Vector>& ys) {
  const KalmanResult kf = kalman_filter(model, ys);
  const std::size_t n = kf.filtered_mean.size();
  SmootherResult out;
  out.mean = kf.filtered_mean;
  out.cov = kf.filtered_cov;
  out.cross.assign(n > 0 ? n - 1 : 0, Matrix());
  for (std::size_t k = n - 1; k-- > 0;) {
    const Matrix& Pp = kf.predicted_cov[k + 1];
    // pseudo-inverse guards a degenerate prediction (P0 = 0 and Q = 0)
    const Matrix G = kf.filtered_cov[k] * model.A.transpose() *
                     Pp.completeOrthogonalDecomposition().pseudoInverse();
    out.mean[k] = kf.filtered_mean[k] + G * (out.mean[k + 1] - kf.predicted_mean[k + 1]);
    out.cov[k] = kf.filtered_cov[k] + G * (out.cov[k + 1] - Pp) * G.transpose();
    out.cross[k] = G * out.cov[k + 1];
  }
  return out;
}

LoglikAndScore kalman_loglik_and_score(const LinearGaussianFamily& family, const Vector& theta,
                                       const std::vector<Vector>& ys) {
  LoglikAndScore out;
  out.loglik = kalman_filter(family(theta), ys).loglik;
  out.score.resize(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta(i)));
    Vector tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    out.score(i) = (kalman_filter(family(tp), ys).loglik - kalman_filter(family(tm), ys).loglik) / (2.0 * h);
  }
  return out;
}

double dense_gaussian_loglik(const LinearGaussianModel& model, const std::vector<Vector>& ys) {
  const int dx = static_cast<int>(model.m0.size());
  const int dy = static_cast<int>(model.H.rows());
  const std::size_t n_obs = ys.size();
  if (n_obs == 0) return 0.0;
  const std::size_t n_states = model.observe_initial ? n_obs : n_obs + 1;

  // stacked state moments
  std::vector<Vector> mean(n_states);
  Matrix cov = Matrix::Zero(n_states * dx, n_states * dx);
  mean[0] = model.m0;
  cov.block(0, 0, dx, dx) = model.P0;
  for (std::size_t k = 1; k < n_states; ++k) {
    mean[k] = model.A * mean[k - 1] + model.c;
    for (std::size_t j = 0; j < k; ++j) {
      const Matrix cj = model.A * cov.block((k - 1) * dx, j * dx, dx, dx);
      cov.block(k * dx, j * dx, dx, dx) = cj;
      cov.block(j * dx, k * dx, dx, dx) = cj.transpose();
    }
    cov.block(k * dx, k * dx, dx, dx) =
        model.A * cov.block((k - 1) * dx, (k - 1) * dx, dx, dx) * model.A.transpose() + model.Q;
  }

  const std::size_t offset = model.observe_initial ? 0 : 1;
  Vector y(n_obs * dy), my(n_obs * dy);
  Matrix S = Matrix::Zero(n_obs * dy, n_obs * dy);
  for (std::size_t a = 0; a < n_obs; ++a) {
    y.segment(a * dy, dy) = ys[a];
    my.segment(a * dy, dy) = model.H * mean[a + offset];
    for (std::size_t b = 0; b < n_obs; ++b) {
      S.block(a * dy, b * dy, dy, dy) =
          model.H * cov.block((a + offset) * dx, (b + offset) * dx, dx, dx) * model.H.transpose();
    }
    S.block(a * dy, a * dy, dy, dy) += model.R;
  }
  return mvn_logpdf(y - my, S);
}

LinearGaussianFamily ou_linear_gaussian(double dt, double obs_sd, double x0, int euler_grid) {
  return [=](const Vector& theta) {
    const double a = theta(0), mu = theta(1), s = theta(2);
    double A, Q;
    if (euler_grid <= 0) {
      A = std::exp(-a * dt);
      Q = s * s * ou_var_factor(a, dt);
    } else {
      const double h = dt / euler_grid;
      const double r = 1.0 - a * h;
      A = std::pow(r, euler_grid);
      double geo = 0.0, p = 1.0;
      for (int m = 0; m < euler_grid; ++m) {
        geo += p;
        p *= r * r;
      }
      Q = s * s * h * geo;
    }
    LinearGaussianModel lg;
    lg.A = Matrix::Constant(1, 1, A);
    lg.c = Vector::Constant(1, mu * (1.0 - A));
    lg.Q = Matrix::Constant(1, 1, Q);
    lg.H = Matrix::Identity(1, 1);
    lg.R = Matrix::Constant(1, 1, obs_sd * obs_sd);
    lg.m0 = Vector::Constant(1, x0);
    lg.P0 = Matrix::Zero(1, 1);
    return lg;
  };
}

ValueAndGradient ou_bridge_logdensity_gradient(const Vector& theta, double x, double xp, double horizon,
                                               const Matrix& increments) {
  const double a = theta(0), mu = theta(1), s = theta(2);
  const int M = static_cast<int>(increments.rows()) + 1;
  const double dt = horizon / M;
  const Eigen::Vector3d ds(0.0, 0.0, 1.0);

  double X = x;
  Eigen::Vector3d dX = Eigen::Vector3d::Zero();
  double val = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  for (int j = 0; j < M - 1; ++j) {
    const double w = 1.0 / (horizon - j * dt);
    const double g = (xp - X) * w;
    const Eigen::Vector3d dg = -dX * w;
    const double b = a * (mu - X);
    const Eigen::Vector3d db = Eigen::Vector3d(mu - X, a, 0.0) - a * dX;
    const double z = increments(j, 0);
    val += -0.5 * dt * g * g / (s * s) - g * z / s;
    grad += -dt * g * dg / (s * s) + dt * g * g * ds / (s * s * s) - dg * z / s + g * z * ds / (s * s);
    X += (b + g) * dt + s * z;
    dX += (db + dg) * dt + z * ds;
  }
  const double b = a * (mu - X);
  const Eigen::Vector3d db = Eigen::Vector3d(mu - X, a, 0.0) - a * dX;
  const double r = xp - X - b * dt;
  const Eigen::Vector3d dr = -dX - db * dt;
  const double var = s * s * dt;
  const Eigen::Vector3d dvar = 2.0 * s * dt * ds;
  val += -0.5 * (kLog2Pi + std::log(var)) - r * r / (2.0 * var);
  grad += -0.5 * dvar / var - r * dr / var + r * r * dvar / (2.0 * var * var);
  return {val, grad};
}

}  // namespace pathsmooth
