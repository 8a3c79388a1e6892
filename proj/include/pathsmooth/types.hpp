#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace pathsmooth {

/// Compile-time capacity for state and Brownian dimensions. Kernel-side
/// vectors use inline storage up to this size so the O(N^2) density loops
/// never touch the heap.
inline constexpr int kMaxDim = 6;
/// Capacity for parameter vectors and forward-mode derivative vectors.
inline constexpr int kMaxParams = 8;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

template <typename Scalar>
using State = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

template <typename Scalar>
using ParamVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxParams, 1>;

using Gradient = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxParams, 1>;

/// Forward-mode dual number carrying d/dtheta for every parameter coordinate.
using Dual = Eigen::AutoDiffScalar<Gradient>;

using Rng = std::mt19937_64;

/// Independent stream for (master seed, key...). Streams never alias for
/// distinct key tuples, so results do not depend on evaluation order.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }

template <typename Scalar>
ParamVector<Scalar> lift_params(const Vector& theta);

template <>
inline ParamVector<double> lift_params<double>(const Vector& theta) {
  return theta;
}

/// Seeds one derivative direction per coordinate.
template <>
inline ParamVector<Dual> lift_params<Dual>(const Vector& theta) {
  const auto p = static_cast<int>(theta.size());
  if (p > kMaxParams) throw std::invalid_argument("parameter dimension exceeds kMaxParams");
  ParamVector<Dual> out(p);
  for (int i = 0; i < p; ++i) out(i) = Dual(theta(i), p, i);
  return out;
}

template <typename Scalar>
State<Scalar> lift_state(const Eigen::Ref<const Vector>& x) {
  State<Scalar> out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = Scalar(x(i));
  return out;
}

// ---------------------------------------------------------------------------
// Errors

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sigma = sigma sigma^T failed the SPD check, or a bridge was requested
/// with a non-square diffusion.
class DiffusionDegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class JumpOverflowError : public NumericalError {
 public:
  JumpOverflowError(int count, int cap)
      : NumericalError("jump count " + std::to_string(count) + " exceeds cap " + std::to_string(cap)) {}
};

class ParticleCollapseError : public NumericalError {
 public:
  explicit ParticleCollapseError(int step)
      : NumericalError("all particle weights vanished at step " + std::to_string(step)), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pathsmooth
