#pragma once

#include "pathsmooth/model.hpp"

namespace pathsmooth {

struct SimulationOptions {
  int max_jumps = 100;
};

/// Compound-Poisson jump record on [0, horizon]: direct sampling for constant
/// intensity, Lewis-Shedler thinning otherwise.
JumpSet simulate_jumps(const SdeModel& model, const Vector& theta, double horizon, Rng& rng,
                       const SimulationOptions& options = {});

/// Grid index that carries a jump at time tau: the first grid point >= tau.
int jump_grid_index(double tau, double horizon, int grid);

/// Euler-Maruyama path on a uniform grid of `grid` steps. Drift and diffusion
/// are evaluated at left endpoints; jumps land on the first grid point at or
/// after their event time. The jump record used is embedded in the result.
PathSegment simulate_path(const SdeModel& model, const Vector& theta, const Vector& x0, double horizon, int grid,
                          Rng& rng, const SimulationOptions& options = {});

/// Euler path for a prescribed jump record.
PathSegment simulate_path_with_jumps(const SdeModel& model, const Vector& theta, const Vector& x0, double horizon,
                                     int grid, const JumpSet& jumps, Rng& rng);

}  // namespace pathsmooth
