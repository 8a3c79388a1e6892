#include "pathsmooth/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace pathsmooth {

JumpSet simulate_jumps(const SdeModel& model, const Vector& theta, double horizon, Rng& rng,
                       const SimulationOptions& options) {
  JumpSet jumps;
  if (!model.has_jumps() || horizon <= 0.0) return jumps;
  const ParamVector<double> th = theta;

  std::vector<double> times;
  if (model.constant_intensity()) {
    const double rate = model.jump_intensity(th, 0.0);
    if (rate <= 0.0) return jumps;
    std::poisson_distribution<int> count_dist(rate * horizon);
    const int count = count_dist(rng);
    if (count > options.max_jumps) throw JumpOverflowError(count, options.max_jumps);
    std::uniform_real_distribution<double> unif(0.0, horizon);
    times.resize(count);
    for (auto& t : times) t = unif(rng);
  } else {
    const double bound = model.intensity_bound(theta, horizon);
    if (bound <= 0.0) return jumps;
    std::exponential_distribution<double> gap(bound);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double t = gap(rng); t < horizon; t += gap(rng)) {
      if (unif(rng) * bound <= model.jump_intensity(th, t)) {
        times.push_back(t);
        if (static_cast<int>(times.size()) > options.max_jumps) {
          throw JumpOverflowError(static_cast<int>(times.size()), options.max_jumps);
        }
      }
    }
  }
  std::sort(times.begin(), times.end());
  jumps.reserve(times.size());
  for (double t : times) {
    if (t <= 0.0 || t >= horizon) continue;
    if (!jumps.empty() && t <= jumps.back().time) continue;
    jumps.push_back({t, model.sample_jump_size(theta, rng)});
  }
  return jumps;
}

int jump_grid_index(double tau, double horizon, int grid) {
  const double dt = horizon / grid;
  const int k = static_cast<int>(std::ceil(tau / dt));
  return std::clamp(k, 1, grid);
}

PathSegment simulate_path_with_jumps(const SdeModel& model, const Vector& theta, const Vector& x0, double horizon,
                                     int grid, const JumpSet& jumps, Rng& rng) {
  if (grid < 1) throw ConfigError("grid size must be at least 1");
  if (x0.size() != model.dim_x()) throw ConfigError("initial state has the wrong dimension");
  const int dx = model.dim_x();
  const int dw = model.dim_w();
  const double dt = horizon / grid;
  const double sqdt = std::sqrt(dt);
  const ParamVector<double> th = theta;

  PathSegment seg;
  seg.horizon = horizon;
  seg.jumps = jumps;
  seg.states.resize(grid + 1, dx);
  seg.states.row(0) = x0.transpose();

  std::normal_distribution<double> normal;
  State<double> x(dx), b(dx), dW(dw), next(dx);
  SquareMatrix<double> sigma(dx, dw);
  std::size_t next_jump = 0;
  for (int k = 0; k < grid; ++k) {
    x = seg.states.row(k).transpose();
    model.drift(th, x, b);
    model.diffusion(th, x, sigma);
    for (int i = 0; i < dw; ++i) dW(i) = sqdt * normal(rng);
    next = x + b * dt + sigma * dW;
    while (next_jump < jumps.size() && jump_grid_index(jumps[next_jump].time, horizon, grid) == k + 1) {
      next += jumps[next_jump].size;
      ++next_jump;
    }
    if (!next.allFinite()) {
      throw NumericalError("simulated path became non-finite at grid step " + std::to_string(k + 1));
    }
    seg.states.row(k + 1) = next.transpose();
  }
  return seg;
}

PathSegment simulate_path(const SdeModel& model, const Vector& theta, const Vector& x0, double horizon, int grid,
                          Rng& rng, const SimulationOptions& options) {
  JumpSet jumps = simulate_jumps(model, theta, horizon, rng, options);
  return simulate_path_with_jumps(model, theta, x0, horizon, grid, jumps, rng);
}

}  // namespace pathsmooth
