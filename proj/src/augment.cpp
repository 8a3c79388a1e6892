#include "pathsmooth/augment.hpp"

#include <cmath>

namespace pathsmooth {

void AugmentedTransition::validate() const {
  if (horizon <= 0.0) throw ConfigError("augmented transition has a non-positive horizon");
  switch (kind) {
    case Construct::continuous:
      if (!jumps.empty() || !segment_ends.empty()) throw ConfigError("continuous transition carries jump data");
      if (noise.grid < 2) throw ConfigError("continuous transition needs a noise path");
      break;
    case Construct::one:
      if (segment_ends.size() != jumps.size() + 1 || segment_noise.size() != jumps.size() + 1) {
        throw ConfigError("construct one needs kappa + 1 segments");
      }
      break;
    case Construct::two:
      if (!segment_ends.empty()) throw ConfigError("construct two carries segment data");
      if (noise.grid < 2) throw ConfigError("construct two needs a noise path");
      break;
  }
}

template <typename S>
S jump_measure_logdensity(const SdeModel& model, const ParamVector<S>& theta, const JumpSet& jumps,
                          double horizon) {
  using std::log;
  S acc = S(horizon) - model.integrated_intensity(theta, horizon);
  for (const auto& ev : jumps) {
    acc += log(model.jump_intensity(theta, ev.time));
    acc += model.jump_size_logdensity(theta, State<double>(ev.size));
  }
  return acc;
}

template double jump_measure_logdensity<double>(const SdeModel&, const ParamVector<double>&, const JumpSet&, double);
template Dual jump_measure_logdensity<Dual>(const SdeModel&, const ParamVector<Dual>&, const JumpSet&, double);

int segment_grid(int total_grid, double length, double horizon) {
  return std::max(2, static_cast<int>(std::lround(total_grid * length / horizon)));
}

AugmentedTransition continuous_sample(const SdeModel& model, const Vector& theta, const Vector& x, double horizon,
                                      int grid, Rng& rng, const AugmentOptions& options) {
  if (model.has_jumps()) throw ConfigError("model '" + model.name() + "' has jumps; pick construct one or two");
  if (grid < 2) throw ConfigError("grid size must be at least 2");
  AugmentedTransition aug;
  aug.kind = Construct::continuous;
  aug.horizon = horizon;
  PathSegment seg = simulate_path_with_jumps(model, theta, x, horizon, grid, {}, rng);
  aug.endpoint = seg.endpoint();
  aug.noise = bridge_inverse_map(model, theta, seg, x, aug.endpoint);
  if (options.keep_path) aug.path = std::move(seg.states);
  return aug;
}

AugmentedTransition construct_one_sample(const SdeModel& model, const Vector& theta, const Vector& x,
                                         double horizon, int total_grid, Rng& rng, const AugmentOptions& options) {
  if (total_grid < 2) throw ConfigError("grid size must be at least 2");
  AugmentedTransition aug;
  aug.kind = Construct::one;
  aug.horizon = horizon;
  aug.jumps = simulate_jumps(model, theta, horizon, rng, options.simulation);

  Vector start = x;
  double t0 = 0.0;
  for (std::size_t i = 0; i <= aug.jumps.size(); ++i) {
    const double t1 = i < aug.jumps.size() ? aug.jumps[i].time : horizon;
    const double len = t1 - t0;
    const int m = segment_grid(total_grid, len, horizon);
    PathSegment seg = simulate_path_with_jumps(model, theta, start, len, m, {}, rng);
    Vector end = seg.endpoint();
    aug.segment_noise.push_back(bridge_inverse_map(model, theta, seg, start, end));
    aug.segment_ends.push_back(end);
    if (i < aug.jumps.size()) start = end + aug.jumps[i].size;
    t0 = t1;
  }
  aug.endpoint = aug.segment_ends.back();
  return aug;
}

AugmentedTransition construct_two_sample(const SdeModel& model, const Vector& theta, const Vector& x,
                                         double horizon, int grid, Rng& rng, const AugmentOptions& options) {
  if (grid < 2) throw ConfigError("grid size must be at least 2");
  AugmentedTransition aug;
  aug.kind = Construct::two;
  aug.horizon = horizon;
  PathSegment seg = simulate_path(model, theta, x, horizon, grid, rng, options.simulation);
  aug.endpoint = seg.endpoint();
  aug.jumps = seg.jumps;
  aug.grid_jumps = snap_jumps(aug.jumps, horizon, grid, model.dim_x());
  aug.noise = bridge_inverse_map(model, theta, seg, x, aug.endpoint, &aug.grid_jumps);
  if (options.keep_path) aug.path = std::move(seg.states);
  return aug;
}

AugmentedTransition sample_transition(Construct kind, const SdeModel& model, const Vector& theta, const Vector& x,
                                      double horizon, int grid, Rng& rng, const AugmentOptions& options) {
  switch (kind) {
    case Construct::continuous:
      return continuous_sample(model, theta, x, horizon, grid, rng, options);
    case Construct::one:
      return construct_one_sample(model, theta, x, horizon, grid, rng, options);
    case Construct::two:
      return construct_two_sample(model, theta, x, horizon, grid, rng, options);
  }
  throw ConfigError("unknown construct");
}

template <typename S>
S transition_logdensity(const SdeModel& model, const ParamVector<S>& theta, const Eigen::Ref<const Vector>& x,
                        const AugmentedTransition& aug, DensityScheme scheme, PathMatrix<S>* path) {
  switch (aug.kind) {
    case Construct::continuous:
      return bridge_logdensity<S>(model, theta, x, aug.endpoint, aug.noise, scheme, nullptr, path);
    case Construct::two:
      return jump_measure_logdensity<S>(model, theta, aug.jumps, aug.horizon) +
             bridge_logdensity<S>(model, theta, x, aug.endpoint, aug.noise, DensityScheme::euler_ratio,
                                  &aug.grid_jumps, path);
    case Construct::one: {
      S acc = jump_measure_logdensity<S>(model, theta, aug.jumps, aug.horizon);
      State<double> start = x;
      for (std::size_t i = 0; i < aug.segment_ends.size(); ++i) {
        acc += bridge_logdensity<S>(model, theta, start, aug.segment_ends[i], aug.segment_noise[i], scheme);
        if (i < aug.jumps.size()) start = aug.segment_ends[i] + aug.jumps[i].size;
      }
      return acc;
    }
  }
  throw ConfigError("unknown construct");
}

template double transition_logdensity<double>(const SdeModel&, const ParamVector<double>&,
                                              const Eigen::Ref<const Vector>&, const AugmentedTransition&,
                                              DensityScheme, PathMatrix<double>*);
template Dual transition_logdensity<Dual>(const SdeModel&, const ParamVector<Dual>&, const Eigen::Ref<const Vector>&,
                                          const AugmentedTransition&, DensityScheme, PathMatrix<Dual>*);

double construct_one_logdensity(const SdeModel& model, const Vector& theta, const Vector& x,
                                const AugmentedTransition& aug, DensityScheme scheme) {
  if (aug.kind != Construct::one) throw ConfigError("expected a construct one transition");
  return transition_logdensity<double>(model, ParamVector<double>(theta), x, aug, scheme);
}

double construct_two_logdensity(const SdeModel& model, const Vector& theta, const Vector& x,
                                const AugmentedTransition& aug) {
  if (aug.kind != Construct::two) throw ConfigError("expected a construct two transition");
  return transition_logdensity<double>(model, ParamVector<double>(theta), x, aug);
}

PathSegment construct_two_path(const SdeModel& model, const Vector& theta, const Vector& x,
                               const AugmentedTransition& aug) {
  if (aug.kind != Construct::two) throw ConfigError("expected a construct two transition");
  PathSegment seg = bridge_forward_map(model, theta, aug.noise, x, aug.endpoint, &aug.grid_jumps);
  seg.jumps = aug.jumps;
  return seg;
}

}  // namespace pathsmooth
