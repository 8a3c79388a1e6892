#pragma once

#include "pathsmooth/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pathsmooth {

/// Grid path storage: one row per grid point.
template <typename Scalar>
using PathMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Read-only view of a discretised path handed to observation densities.
/// Endpoint-only observation models may receive a single-row view.
template <typename Scalar>
struct PathView {
  Eigen::Ref<const PathMatrix<Scalar>> states;
  double dt = 0.0;

  auto endpoint() const { return states.row(states.rows() - 1).transpose(); }
};

struct JumpEvent {
  double time = 0.0;
  Vector size;
};

/// Jump record on [0, T]: strictly increasing times in (0, T).
using JumpSet = std::vector<JumpEvent>;

/// Uniform-grid path on [0, horizon]; rows are t_0 ... t_M.
struct PathSegment {
  double horizon = 0.0;
  Matrix states;
  JumpSet jumps;

  int grid() const { return static_cast<int>(states.rows()) - 1; }
  double dt() const { return horizon / grid(); }
  Vector endpoint() const { return states.row(states.rows() - 1).transpose(); }
};

/// Wiener increments driving a bridge over [0, horizon] on `grid` steps.
/// Under exact endpoint pinning the final increment is not identified, so
/// only grid - 1 rows are stored.
struct NoisePath {
  double horizon = 0.0;
  int grid = 0;
  Matrix increments;

  double dt() const { return horizon / grid; }
};

struct ParamDomain {
  enum class Kind { unconstrained, positive, periodic };
  Kind kind = Kind::unconstrained;
  double lower = 0.0;
  double upper = 0.0;

  static ParamDomain unconstrained() { return {}; }
  static ParamDomain positive() { return {Kind::positive, 0.0, 0.0}; }
  static ParamDomain periodic(double lo, double hi) { return {Kind::periodic, lo, hi}; }

  bool contains(double v) const;
  /// Wraps periodic coordinates into [lower, upper); identity otherwise.
  double wrap(double v) const;
};

struct ModelInfo {
  std::string name;
  int dim_x = 1;
  int dim_w = 1;
  std::vector<std::string> param_names;
  std::vector<ParamDomain> domains;
};

/// Jump-diffusion with a partially observed state:
///   dX = b(X-) dt + sigma(X-) dW + dJ,   y_i ~ g(. | y_{i-1}, path on [t_{i-1}, t_i]).
///
/// Coefficients come in double and Dual overloads so that densities can be
/// differentiated in theta by forward-mode AD. Derive from SdeModelAdapter
/// to write each coefficient once as a template.
class SdeModel {
 public:
  explicit SdeModel(ModelInfo info);
  virtual ~SdeModel() = default;

  const ModelInfo& info() const noexcept { return info_; }
  const std::string& name() const noexcept { return info_.name; }
  int dim_x() const noexcept { return info_.dim_x; }
  int dim_w() const noexcept { return info_.dim_w; }
  int dim_theta() const noexcept { return static_cast<int>(info_.param_names.size()); }
  virtual int dim_obs() const { return dim_x(); }

  virtual void drift(const ParamVector<double>& theta, const State<double>& x, State<double>& out) const = 0;
  virtual void drift(const ParamVector<Dual>& theta, const State<Dual>& x, State<Dual>& out) const = 0;
  /// Fills the d_x by d_w diffusion matrix sigma(x).
  virtual void diffusion(const ParamVector<double>& theta, const State<double>& x,
                         SquareMatrix<double>& out) const = 0;
  virtual void diffusion(const ParamVector<Dual>& theta, const State<Dual>& x, SquareMatrix<Dual>& out) const = 0;

  // Jumps. Models without jumps keep the defaults.
  virtual bool has_jumps() const { return false; }
  virtual bool constant_intensity() const { return true; }
  virtual double jump_intensity(const ParamVector<double>& theta, double t) const;
  virtual Dual jump_intensity(const ParamVector<Dual>& theta, double t) const;
  /// Upper bound of the intensity on [0, horizon]; used for thinning.
  virtual double intensity_bound(const Vector& theta, double horizon) const;
  virtual double jump_size_logdensity(const ParamVector<double>& theta, const State<double>& size) const;
  virtual Dual jump_size_logdensity(const ParamVector<Dual>& theta, const State<double>& size) const;
  virtual Vector sample_jump_size(const Vector& theta, Rng& rng) const;

  /// int_0^T lambda(t) dt; closed form for constant rates, Simpson otherwise.
  double integrated_intensity(const ParamVector<double>& theta, double horizon) const;
  Dual integrated_intensity(const ParamVector<Dual>& theta, double horizon) const;

  /// True when g needs the whole path rather than only the endpoint.
  virtual bool observation_uses_path() const { return false; }
  virtual double obs_logdensity(const ParamVector<double>& theta, const Vector& y, const Vector* y_prev,
                                const PathView<double>& path) const = 0;
  virtual Dual obs_logdensity(const ParamVector<Dual>& theta, const Vector& y, const Vector* y_prev,
                              const PathView<Dual>& path) const = 0;
  virtual Vector sample_observation(const Vector& theta, const Vector* y_prev, const PathSegment& path,
                                    Rng& rng) const = 0;

  /// Draw from the initial law p_theta(dx_0).
  virtual Vector sample_initial(const Vector& theta, Rng& rng) const = 0;

  /// Extra admissibility constraints beyond per-coordinate domains.
  virtual bool admissible(const Vector& theta) const;
  /// Maps an inadmissible theta onto the feasible set.
  virtual Vector project(const Vector& theta) const { return theta; }

 private:
  template <typename Scalar>
  Scalar integrated_intensity_impl(const ParamVector<Scalar>& theta, double horizon) const;

  ModelInfo info_;
};

using ModelPtr = std::shared_ptr<const SdeModel>;

/// Forwards the virtual double/Dual pairs to templated members of Derived:
///   drift_t, diffusion_t, obs_logdensity_t.
template <class Derived>
class SdeModelAdapter : public SdeModel {
 public:
  using SdeModel::SdeModel;

  void drift(const ParamVector<double>& theta, const State<double>& x, State<double>& out) const final {
    self().drift_t(theta, x, out);
  }
  void drift(const ParamVector<Dual>& theta, const State<Dual>& x, State<Dual>& out) const final {
    self().drift_t(theta, x, out);
  }
  void diffusion(const ParamVector<double>& theta, const State<double>& x, SquareMatrix<double>& out) const final {
    self().diffusion_t(theta, x, out);
  }
  void diffusion(const ParamVector<Dual>& theta, const State<Dual>& x, SquareMatrix<Dual>& out) const final {
    self().diffusion_t(theta, x, out);
  }
  double obs_logdensity(const ParamVector<double>& theta, const Vector& y, const Vector* y_prev,
                        const PathView<double>& path) const final {
    return self().obs_logdensity_t(theta, y, y_prev, path);
  }
  Dual obs_logdensity(const ParamVector<Dual>& theta, const Vector& y, const Vector* y_prev,
                      const PathView<Dual>& path) const final {
    return self().obs_logdensity_t(theta, y, y_prev, path);
  }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// Throws ConfigError when theta has the wrong size or leaves its domain.
void check_parameters(const SdeModel& model, const Vector& theta);

}  // namespace pathsmooth
