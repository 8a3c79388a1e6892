#pragma once

#include "pathsmooth/model.hpp"
#include "pathsmooth/spd.hpp"

#include <vector>

namespace pathsmooth {

/// How the pathspace density of (x', Z) is discretised.
///   euler_ratio: Euler joint density of the unconditioned path divided by
///     the Euler density of the guided path. This is the exact density of
///     (x', Z) under the Euler law the particles are propagated with.
///   girsanov: the Delyon-Hu likelihood ratio (four path integrals as
///     left-point sums) times N(x'; x, T Sigma(x)) |Sigma(x')|^1/2 / |Sigma(x)|^1/2.
enum class DensityScheme { euler_ratio, girsanov };

/// Jumps snapped onto the bridge grid: `index[k]` is the grid point that
/// receives `size[k]`. Sorted by index.
struct GridJumps {
  std::vector<int> index;
  std::vector<State<double>> size;

  bool empty() const { return index.empty(); }
  /// Total jump mass landing in (t_0, t_j].
  State<double> cumulative(int j, int dim) const;
};

GridJumps snap_jumps(const JumpSet& jumps, double horizon, int grid, int dim);

/// Guided bridge from x to x' driven by `noise`, optionally with jumps
/// added on the grid (the guide then aims at x' - J_T + J_t). Returns the
/// log density of (x', Z) and fills `path` when non-null. The girsanov
/// scheme is only defined without jumps.
template <typename Scalar>
Scalar bridge_logdensity(const SdeModel& model, const ParamVector<Scalar>& theta, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& xp, const NoisePath& noise, DensityScheme scheme,
                         const GridJumps* jumps = nullptr, PathMatrix<Scalar>* path = nullptr);

/// Discretised log phi of a given grid path ending at x'.
template <typename Scalar>
Scalar log_phi_t(const SdeModel& model, const ParamVector<Scalar>& theta, const PathMatrix<Scalar>& path,
                 const Eigen::Ref<const Vector>& xp, double horizon);

/// Euler path of the guided SDE; the final state is x' exactly.
PathSegment bridge_forward_map(const SdeModel& model, const Vector& theta, const NoisePath& noise, const Vector& x,
                               const Vector& xp, const GridJumps* jumps = nullptr);

/// Recovers Z from a grid path: Z_j = sigma^T Sigma^{-1} (dX_j - dJ_j - (b + guide) dt).
/// Needs d_w = d_x.
NoisePath bridge_inverse_map(const SdeModel& model, const Vector& theta, const PathSegment& path, const Vector& x,
                             const Vector& xp, const GridJumps* jumps = nullptr);

double log_phi(const SdeModel& model, const Vector& theta, const PathSegment& path, const Vector& x,
               const Vector& xp);

double log_pathspace_density(const SdeModel& model, const Vector& theta, const Vector& x, const Vector& xp,
                             const NoisePath& noise, DensityScheme scheme = DensityScheme::euler_ratio);

/// Standard normal increments scaled to the grid: grid - 1 rows of N(0, dt I).
NoisePath sample_noise(int dim_w, double horizon, int grid, Rng& rng);

}  // namespace pathsmooth
