#pragma once

#include "pathsmooth/bridge.hpp"
#include "pathsmooth/simulate.hpp"

namespace pathsmooth {

enum class Construct { continuous, one, two };

/// The augmented variable x' for one inter-observation interval.
///   continuous: (x', Z)
///   construct one: (J, {x_{tau_i-}}, {Z(i)}), one bridge per inter-jump segment
///   construct two: (x', J, Z), one jump-adapted bridge on the full grid
struct AugmentedTransition {
  Construct kind = Construct::continuous;
  double horizon = 0.0;
  Vector endpoint;
  NoisePath noise;
  JumpSet jumps;
  std::vector<Vector> segment_ends;
  std::vector<NoisePath> segment_noise;
  GridJumps grid_jumps;
  /// Forward-simulated grid path, kept only when the observation density
  /// reads the whole path.
  Matrix path;

  /// Throws ConfigError when fields do not match the tag.
  void validate() const;
};

struct AugmentOptions {
  DensityScheme scheme = DensityScheme::euler_ratio;
  SimulationOptions simulation;
  bool keep_path = false;
};

/// (T - int lambda) + sum_i [log lambda(tau_i) + log h(b_i)]: density of J
/// against a unit-rate Poisson reference.
template <typename Scalar>
Scalar jump_measure_logdensity(const SdeModel& model, const ParamVector<Scalar>& theta, const JumpSet& jumps,
                               double horizon);

/// Grid steps for a Construct One segment: max(2, round(M_total * len / T)).
int segment_grid(int total_grid, double length, double horizon);

AugmentedTransition continuous_sample(const SdeModel& model, const Vector& theta, const Vector& x, double horizon,
                                      int grid, Rng& rng, const AugmentOptions& options = {});
AugmentedTransition construct_one_sample(const SdeModel& model, const Vector& theta, const Vector& x,
                                         double horizon, int total_grid, Rng& rng, const AugmentOptions& options = {});
AugmentedTransition construct_two_sample(const SdeModel& model, const Vector& theta, const Vector& x,
                                         double horizon, int grid, Rng& rng, const AugmentOptions& options = {});

AugmentedTransition sample_transition(Construct kind, const SdeModel& model, const Vector& theta, const Vector& x,
                                      double horizon, int grid, Rng& rng, const AugmentOptions& options = {});

/// log p_theta(x' | x) for any tag, with (Z, J) held fixed. `path`, when
/// non-null, receives the re-derived grid path (continuous and construct two).
template <typename Scalar>
Scalar transition_logdensity(const SdeModel& model, const ParamVector<Scalar>& theta, const Eigen::Ref<const Vector>& x,
                             const AugmentedTransition& aug, DensityScheme scheme = DensityScheme::euler_ratio,
                             PathMatrix<Scalar>* path = nullptr);

double construct_one_logdensity(const SdeModel& model, const Vector& theta, const Vector& x,
                                const AugmentedTransition& aug, DensityScheme scheme = DensityScheme::euler_ratio);
double construct_two_logdensity(const SdeModel& model, const Vector& theta, const Vector& x,
                                const AugmentedTransition& aug);

/// Rebuilds the Construct Two path G(J, Z; x, x').
PathSegment construct_two_path(const SdeModel& model, const Vector& theta, const Vector& x,
                               const AugmentedTransition& aug);

}  // namespace pathsmooth
