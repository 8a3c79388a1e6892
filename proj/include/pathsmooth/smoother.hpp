#pragma once

#include "pathsmooth/augment.hpp"

#include <functional>
#include <optional>

namespace pathsmooth {

struct StepContext {
  int k = 0;
  const Vector* y = nullptr;
  const Vector* y_prev = nullptr;
  double horizon = 1.0;
};

/// x is the endpoint for pathspace particles and the whole state for
/// discrete ones; aug is empty in the discrete case.
struct Particle {
  AugmentedTransition aug;
  Vector x;
  double log_weight = 0.0;
  Vector t_value;
};

struct FilterState {
  int step = 0;
  std::vector<Particle> particles;
  Vector estimate;
  double loglik = 0.0;
  double last_increment = 0.0;
  double ess = 0.0;
  bool resampled = false;
};

/// Everything the smoother needs from the latent dynamics: a sampler, the
/// observation density and a transition density it can evaluate for any
/// (ancestor, particle) pair.
class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual const SdeModel* model() const { return nullptr; }
  virtual int dim_theta() const = 0;

  virtual Vector sample_initial(const Vector& theta, Rng& rng) const = 0;
  virtual void propagate(const Vector& theta, const StepContext& ctx, const Particle& prev, Particle& out,
                         Rng& rng) const = 0;
  /// log g for the particle as propagated (used for weighting).
  virtual double log_obs(const Vector& theta, const StepContext& ctx, const Particle& cur) const = 0;
  virtual double log_obs_initial(const Vector& theta, const Vector& y0, const Vector& x0) const;
  /// log p(cur | prev), plus log g of the pair-dependent path when
  /// `with_obs` is set and the observation reads the path.
  virtual double log_pair(const Vector& theta, const StepContext& ctx, const Particle& prev, const Particle& cur,
                          bool with_obs) const = 0;
  /// True when g changes with the ancestor at fixed auxiliary noise.
  virtual bool obs_in_pair() const { return false; }

  virtual bool has_dual() const { return false; }
  virtual Dual log_pair_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& prev,
                             const Particle& cur, bool with_obs) const;
  virtual Dual log_obs_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& cur) const;

  /// Keep theta in its domain (used by finite differences).
  virtual bool in_domain(const Vector& theta) const;
};

/// S(x_{0:n}) = s_0(x_0) + sum_k s_k(x_{k-1}, x_k).
class AdditiveFunctional {
 public:
  virtual ~AdditiveFunctional() = default;
  virtual int dim() const = 0;
  virtual Vector initial(const Dynamics& dyn, const Vector& theta, const Vector& x0, const Vector* y0) const;
  /// The part of s_k that depends only on the new particle.
  virtual void particle_term(const Dynamics& dyn, const Vector& theta, const StepContext& ctx, const Particle& cur,
                             Eigen::Ref<Vector> out) const;
  /// Returns log p(cur | prev) and writes the pair part of s_k. Override to
  /// share work between the two.
  virtual double pair(const Dynamics& dyn, const Vector& theta, const StepContext& ctx, const Particle& prev,
                      const Particle& cur, Eigen::Ref<Vector> s) const;
  virtual void increment(const Dynamics& dyn, const Vector& theta, const StepContext& ctx, const Particle& prev,
                         const Particle& cur, Eigen::Ref<Vector> s) const;
};

/// s_k given by a plain callback on (x_{k-1}, x_k) with s_0 = 0.
class LambdaFunctional final : public AdditiveFunctional {
 public:
  using Fn = std::function<void(const StepContext&, const Vector& x_prev, const Vector& x, Eigen::Ref<Vector>)>;
  LambdaFunctional(int dim, Fn fn) : dim_(dim), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  void increment(const Dynamics&, const Vector&, const StepContext& ctx, const Particle& prev, const Particle& cur,
                 Eigen::Ref<Vector> s) const override {
    fn_(ctx, prev.x, cur.x, s);
  }

 private:
  int dim_;
  Fn fn_;
};

enum class ResampleScheme { multinomial, systematic, stratified };

/// Ancestor indices with E[#offspring of i] = N W_i. Weights are normalised.
std::vector<int> resample(const std::vector<double>& weights, ResampleScheme scheme, Rng& rng);
double effective_sample_size(const std::vector<double>& weights);

struct SmootherConfig {
  int particles = 100;
  ResampleScheme resample = ResampleScheme::multinomial;
  /// Resample only when ESS < threshold * N; unset means every step.
  std::optional<double> ess_threshold;
  int workers = 1;
  std::uint64_t seed = 1;
};

FilterState init_filter(const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta, const Vector* y0,
                        const SmootherConfig& config);

/// One forward-only step: resample, propagate, weight, then the O(N^2)
/// update T_i = sum_j w_ij (T_j + s(x_j, x_i)), w_ij ~ W_j p(x_i | x_j).
void smoother_step(FilterState& state, const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta,
                   const StepContext& ctx, const SmootherConfig& config);

struct SmootherRun {
  FilterState final_state;
  std::vector<Vector> estimates;
  std::vector<double> increments;
};

/// Filters y_1 .. y_n (observations at multiples of dt) from a known start.
SmootherRun run_smoother(const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta,
                         const std::vector<Vector>& ys, double dt, const SmootherConfig& config,
                         const Vector* y0 = nullptr);

// ---------------------------------------------------------------------------
// Dynamics implementations

/// Pathspace dynamics (continuous bridges, Construct One or Construct Two).
class PathspaceDynamics final : public Dynamics {
 public:
  PathspaceDynamics(ModelPtr model, Construct construct, int grid, DensityScheme scheme = DensityScheme::euler_ratio,
                    SimulationOptions simulation = {});

  const SdeModel* model() const override { return model_.get(); }
  int dim_theta() const override { return model_->dim_theta(); }
  Construct construct() const { return construct_; }
  int grid() const { return grid_; }

  Vector sample_initial(const Vector& theta, Rng& rng) const override;
  void propagate(const Vector& theta, const StepContext& ctx, const Particle& prev, Particle& out,
                 Rng& rng) const override;
  double log_obs(const Vector& theta, const StepContext& ctx, const Particle& cur) const override;
  double log_obs_initial(const Vector& theta, const Vector& y0, const Vector& x0) const override;
  double log_pair(const Vector& theta, const StepContext& ctx, const Particle& prev, const Particle& cur,
                  bool with_obs) const override;
  bool obs_in_pair() const override { return model_->observation_uses_path(); }

  bool has_dual() const override { return true; }
  Dual log_pair_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& prev,
                     const Particle& cur, bool with_obs) const override;
  Dual log_obs_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& cur) const override;
  bool in_domain(const Vector& theta) const override;

 private:
  template <typename S>
  S pair_impl(const ParamVector<S>& theta, const StepContext& ctx, const Particle& prev, const Particle& cur,
              bool with_obs) const;
  template <typename S>
  S obs_impl(const ParamVector<S>& theta, const StepContext& ctx, const Particle& cur) const;

  ModelPtr model_;
  Construct construct_;
  int grid_;
  DensityScheme scheme_;
  SimulationOptions simulation_;
};

/// The naive finite-dimensional augmentation: the latent state is the Euler
/// grid path X_{t_0..t_M} of the interval, flattened, and the transition density is the
/// Euler joint density. Its variance grows with M.
class EulerGridDynamics final : public Dynamics {
 public:
  EulerGridDynamics(ModelPtr model, int grid);

  const SdeModel* model() const override { return model_.get(); }
  int dim_theta() const override { return model_->dim_theta(); }
  Vector sample_initial(const Vector& theta, Rng& rng) const override;
  void propagate(const Vector& theta, const StepContext& ctx, const Particle& prev, Particle& out,
                 Rng& rng) const override;
  double log_obs(const Vector& theta, const StepContext& ctx, const Particle& cur) const override;
  double log_obs_initial(const Vector& theta, const Vector& y0, const Vector& x0) const override;
  double log_pair(const Vector& theta, const StepContext& ctx, const Particle& prev, const Particle& cur,
                  bool with_obs) const override;

  bool has_dual() const override { return true; }
  Dual log_pair_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& prev,
                     const Particle& cur, bool with_obs) const override;
  Dual log_obs_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& cur) const override;
  bool in_domain(const Vector& theta) const override;

  /// Endpoint of a grid-path state.
  Vector endpoint(const Vector& state) const;

 private:
  template <typename S>
  S pair_impl(const ParamVector<S>& theta, double horizon, const Vector& x_prev_end, const Vector& state) const;
  template <typename S>
  S obs_impl(const ParamVector<S>& theta, const StepContext& ctx, const Vector& state) const;

  ModelPtr model_;
  int grid_;
};

/// Discrete-time state space model with user-supplied densities: f(x' | x), g(y | x) and a
/// sampler for f. States are plain vectors.
struct DiscreteModel {
  int dim_theta = 0;
  std::function<Vector(const Vector& theta, Rng&)> sample_initial;
  std::function<Vector(const Vector& theta, const Vector& x, Rng&)> sample_transition;
  std::function<double(const Vector& theta, const Vector& x, const Vector& xp)> log_transition;
  std::function<double(const Vector& theta, const Vector& y, const Vector& x)> log_obs;
};

class DiscreteDynamics final : public Dynamics {
 public:
  explicit DiscreteDynamics(DiscreteModel model) : model_(std::move(model)) {}
  int dim_theta() const override { return model_.dim_theta; }
  Vector sample_initial(const Vector& theta, Rng& rng) const override { return model_.sample_initial(theta, rng); }
  void propagate(const Vector& theta, const StepContext&, const Particle& prev, Particle& out,
                 Rng& rng) const override {
    out.x = model_.sample_transition(theta, prev.x, rng);
  }
  double log_obs(const Vector& theta, const StepContext& ctx, const Particle& cur) const override {
    return model_.log_obs(theta, *ctx.y, cur.x);
  }
  double log_obs_initial(const Vector& theta, const Vector& y0, const Vector& x0) const override {
    return model_.log_obs(theta, y0, x0);
  }
  double log_pair(const Vector& theta, const StepContext&, const Particle& prev, const Particle& cur,
                  bool) const override {
    return model_.log_transition(theta, prev.x, cur.x);
  }

 private:
  DiscreteModel model_;
};

/// Forward-only step for discrete-time dynamics.
void discrete_step(FilterState& state, const DiscreteDynamics& dyn, const AdditiveFunctional& fn,
                   const Vector& theta, const StepContext& ctx, const SmootherConfig& config);

}  // namespace pathsmooth
