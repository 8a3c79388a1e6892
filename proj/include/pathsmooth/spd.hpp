#pragma once

#include "pathsmooth/types.hpp"

#include <cmath>

namespace pathsmooth {

/// Cholesky factor of a covariance Sigma = sigma sigma^T. A failed
/// factorisation is reported as a diffusion degeneracy.
template <typename Scalar>
class SpdFactor {
 public:
  SpdFactor() = default;

  /// Factorises sigma sigma^T; throws DiffusionDegeneracyError unless SPD.
  void compute_from_diffusion(const SquareMatrix<Scalar>& sigma) {
    dim_ = static_cast<int>(sigma.rows());
    if (dim_ == 1 && sigma.cols() == 1) {
      scalar_var_ = sigma(0, 0) * sigma(0, 0);
      check_scalar();
      return;
    }
    SquareMatrix<Scalar> cov = sigma * sigma.transpose();
    compute(cov);
  }

  void compute(const SquareMatrix<Scalar>& cov) {
    dim_ = static_cast<int>(cov.rows());
    if (dim_ == 1) {
      scalar_var_ = cov(0, 0);
      check_scalar();
      return;
    }
    llt_.compute(cov);
    if (llt_.info() != Eigen::Success) {
      throw DiffusionDegeneracyError("diffusion covariance is not symmetric positive definite");
    }
    const auto diag = llt_.matrixLLT().diagonal();
    for (int i = 0; i < dim_; ++i) {
      if (!(value_of(diag(i)) > 0.0) || !std::isfinite(value_of(diag(i)))) {
        throw DiffusionDegeneracyError("diffusion covariance is not symmetric positive definite");
      }
    }
  }

  int dim() const { return dim_; }

  Scalar logdet() const {
    using std::log;
    if (dim_ == 1) return log(scalar_var_);
    Scalar acc(0.0);
    const auto diag = llt_.matrixLLT().diagonal();
    for (int i = 0; i < dim_; ++i) acc += log(diag(i));
    return acc * 2.0;
  }

  /// v^T Sigma^{-1} v
  template <typename Derived>
  Scalar quad(const Eigen::MatrixBase<Derived>& v) const {
    if (dim_ == 1) return v(0) * v(0) / scalar_var_;
    State<Scalar> w = llt_.matrixL().solve(State<Scalar>(v));
    return w.squaredNorm();
  }

  /// u^T Sigma^{-1} v
  template <typename DerivedU, typename DerivedV>
  Scalar inner(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) const {
    if (dim_ == 1) return u(0) * v(0) / scalar_var_;
    State<Scalar> w = llt_.solve(State<Scalar>(v));
    return u.dot(w);
  }

  template <typename Derived>
  State<Scalar> solve(const Eigen::MatrixBase<Derived>& v) const {
    if (dim_ == 1) {
      State<Scalar> out(1);
      out(0) = v(0) / scalar_var_;
      return out;
    }
    return llt_.solve(State<Scalar>(v));
  }

  SquareMatrix<Scalar> inverse() const {
    if (dim_ == 1) {
      SquareMatrix<Scalar> out(1, 1);
      out(0, 0) = Scalar(1.0) / scalar_var_;
      return out;
    }
    return llt_.solve(SquareMatrix<Scalar>::Identity(dim_, dim_));
  }

  /// Gaussian log density log N(r; 0, scale * Sigma).
  template <typename Derived>
  Scalar log_normal(const Eigen::MatrixBase<Derived>& residual, double scale) const {
    using std::log;
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    return -0.5 * (dim_ * (kLog2Pi + std::log(scale)) + logdet() + quad(residual) / scale);
  }

 private:
  void check_scalar() const {
    const double v = value_of(scalar_var_);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DiffusionDegeneracyError("diffusion covariance is not symmetric positive definite");
    }
  }

  int dim_ = 0;
  Scalar scalar_var_{};
  Eigen::LLT<SquareMatrix<Scalar>> llt_;
};

}  // namespace pathsmooth
