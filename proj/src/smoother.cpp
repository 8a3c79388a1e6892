#include "pathsmooth/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace pathsmooth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// stream key for the resampling draw of a step; particle streams use 0 .. N-1
constexpr std::uint64_t kResampleKey = 0xffffffffull;

template <class F>
void parallel_for(int n, int workers, F&& body) {
  if (workers <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  workers = std::min(workers, n);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const int end = std::min(n, (w + 1) * chunk);
        for (int i = w * chunk; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Normalises in place; returns log sum exp of the input.
double normalise_log_weights(std::vector<double>& lw) {
  double mx = kNegInf;
  for (double v : lw) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw NumericalError("non-finite observation log density");
    }
    mx = std::max(mx, v);
  }
  if (mx == kNegInf) return kNegInf;
  double tot = 0.0;
  for (double v : lw) tot += std::exp(v - mx);
  const double lse = mx + std::log(tot);
  for (double& v : lw) v -= lse;
  return lse;
}

void refresh_estimate(FilterState& state, int dim) {
  state.estimate = Vector::Zero(dim);
  for (const auto& p : state.particles) {
    if (p.log_weight > kNegInf) state.estimate += std::exp(p.log_weight) * p.t_value;
  }
}

}  // namespace

// --- defaults ---------------------------------------------------------------

double Dynamics::log_obs_initial(const Vector&, const Vector&, const Vector&) const {
  throw ConfigError("these dynamics do not support an observation of x_0");
}
Dual Dynamics::log_pair_dual(const ParamVector<Dual>&, const StepContext&, const Particle&, const Particle&,
                             bool) const {
  throw ConfigError("these dynamics have no forward-mode derivative");
}
Dual Dynamics::log_obs_dual(const ParamVector<Dual>&, const StepContext&, const Particle&) const {
  throw ConfigError("these dynamics have no forward-mode derivative");
}
bool Dynamics::in_domain(const Vector& theta) const { return theta.allFinite(); }

Vector AdditiveFunctional::initial(const Dynamics&, const Vector&, const Vector&, const Vector*) const {
  return Vector::Zero(dim());
}
void AdditiveFunctional::particle_term(const Dynamics&, const Vector&, const StepContext&, const Particle&,
                                       Eigen::Ref<Vector> out) const {
  out.setZero();
}
double AdditiveFunctional::pair(const Dynamics& dyn, const Vector& theta, const StepContext& ctx,
                                const Particle& prev, const Particle& cur, Eigen::Ref<Vector> s) const {
  increment(dyn, theta, ctx, prev, cur, s);
  return dyn.log_pair(theta, ctx, prev, cur, false);
}
void AdditiveFunctional::increment(const Dynamics&, const Vector&, const StepContext&, const Particle&,
                                   const Particle&, Eigen::Ref<Vector> s) const {
  s.setZero();
}

// --- resampling -------------------------------------------------------------

double effective_sample_size(const std::vector<double>& weights) {
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

std::vector<int> resample(const std::vector<double>& weights, ResampleScheme scheme, Rng& rng) {
  const int n = static_cast<int>(weights.size());
  std::vector<int> idx(n);
  if (n == 0) return idx;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(n);
  switch (scheme) {
    case ResampleScheme::multinomial: {
      // sorted uniforms via normalised exponential spacings
      double acc = 0.0;
      std::exponential_distribution<double> expo(1.0);
      for (int i = 0; i < n; ++i) {
        acc += expo(rng);
        u[i] = acc;
      }
      const double total = acc + expo(rng);
      for (double& v : u) v /= total;
      break;
    }
    case ResampleScheme::systematic: {
      const double u0 = unif(rng);
      for (int i = 0; i < n; ++i) u[i] = (i + u0) / n;
      break;
    }
    case ResampleScheme::stratified:
      for (int i = 0; i < n; ++i) u[i] = (i + unif(rng)) / n;
      break;
  }
  double cum = weights[0];
  int j = 0;
  for (int i = 0; i < n; ++i) {
    while (u[i] > cum && j < n - 1) cum += weights[++j];
    idx[i] = j;
  }
  return idx;
}

// --- forward-only smoother --------------------------------------------------

FilterState init_filter(const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta, const Vector* y0,
                        const SmootherConfig& config) {
  const int n = config.particles;
  if (n < 1) throw ConfigError("the particle count must be positive");
  FilterState state;
  state.particles.resize(n);
  std::vector<double> lw(n, 0.0);
  parallel_for(n, config.workers, [&](int i) {
    Rng rng = make_stream(config.seed, {0, static_cast<std::uint64_t>(i)});
    Particle& p = state.particles[i];
    p.x = dyn.sample_initial(theta, rng);
    if (y0) lw[i] = dyn.log_obs_initial(theta, *y0, p.x);
    p.t_value = fn.initial(dyn, theta, p.x, y0);
  });
  const double lse = normalise_log_weights(lw);
  if (lse == kNegInf) throw ParticleCollapseError(0);
  for (int i = 0; i < n; ++i) state.particles[i].log_weight = lw[i];
  state.loglik = y0 ? lse - std::log(static_cast<double>(n)) : 0.0;
  state.last_increment = state.loglik;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = std::exp(lw[i]);
  state.ess = effective_sample_size(w);
  refresh_estimate(state, fn.dim());
  return state;
}

void smoother_step(FilterState& state, const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta,
                   const StepContext& ctx, const SmootherConfig& config) {
  const int n = static_cast<int>(state.particles.size());
  const int dim = fn.dim();
  const int k = state.step + 1;
  if (!ctx.y) throw ConfigError("smoother step needs an observation");

  std::vector<double> w_prev(n), lw_prev(n);
  for (int i = 0; i < n; ++i) {
    lw_prev[i] = state.particles[i].log_weight;
    w_prev[i] = std::exp(lw_prev[i]);
  }
  state.ess = effective_sample_size(w_prev);
  const bool do_resample = !config.ess_threshold || state.ess < *config.ess_threshold * n;

  std::vector<int> ancestors(n);
  if (do_resample) {
    Rng rng = make_stream(config.seed, {static_cast<std::uint64_t>(k), kResampleKey});
    ancestors = resample(w_prev, config.resample, rng);
  } else {
    std::iota(ancestors.begin(), ancestors.end(), 0);
  }

  const std::vector<Particle>& prev = state.particles;
  std::vector<Particle> next(n);
  std::vector<double> lw(n);
  const double log_n = std::log(static_cast<double>(n));
  parallel_for(n, config.workers, [&](int i) {
    Rng rng = make_stream(config.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i)});
    dyn.propagate(theta, ctx, prev[ancestors[i]], next[i], rng);
    const double base = do_resample ? -log_n : lw_prev[ancestors[i]];
    lw[i] = base + dyn.log_obs(theta, ctx, next[i]);
  });

  parallel_for(n, config.workers, [&](int i) {
    Particle& cur = next[i];
    cur.t_value = Vector::Zero(dim);
    if (!(lw[i] > kNegInf)) {
      cur.t_value = prev[ancestors[i]].t_value;
      return;
    }
    Matrix s = Matrix::Zero(dim, n);
    std::vector<double> lp(n, kNegInf);
    double mx = kNegInf;
    for (int j = 0; j < n; ++j) {
      if (!(w_prev[j] > 0.0)) continue;
      double v;
      try {
        v = fn.pair(dyn, theta, ctx, prev[j], cur, s.col(j));
      } catch (const DiffusionDegeneracyError&) {
        v = kNegInf;
      }
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw NumericalError("non-finite transition density for particle pair (" + std::to_string(i) + ", " +
                             std::to_string(j) + ") at step " + std::to_string(k));
      }
      lp[j] = lw_prev[j] + v;
      mx = std::max(mx, lp[j]);
    }
    if (mx == kNegInf) {
      // no ancestor explains this particle under the current density
      lw[i] = kNegInf;
      cur.t_value = prev[ancestors[i]].t_value;
      return;
    }
    double tot = 0.0;
    for (int j = 0; j < n; ++j) {
      if (lp[j] == kNegInf) continue;
      const double e = std::exp(lp[j] - mx);
      tot += e;
      cur.t_value += e * (prev[j].t_value + s.col(j));
    }
    cur.t_value /= tot;
    Vector extra(dim);
    fn.particle_term(dyn, theta, ctx, cur, extra);
    cur.t_value += extra;
    if (!cur.t_value.allFinite()) {
      throw NumericalError("non-finite functional value for particle " + std::to_string(i) + " at step " +
                           std::to_string(k));
    }
  });

  const double lse = normalise_log_weights(lw);
  if (lse == kNegInf) throw ParticleCollapseError(k);
  for (int i = 0; i < n; ++i) next[i].log_weight = lw[i];

  state.particles = std::move(next);
  state.step = k;
  state.resampled = do_resample;
  state.last_increment = lse;
  state.loglik += lse;
  refresh_estimate(state, dim);
}

void discrete_step(FilterState& state, const DiscreteDynamics& dyn, const AdditiveFunctional& fn,
                   const Vector& theta, const StepContext& ctx, const SmootherConfig& config) {
  smoother_step(state, dyn, fn, theta, ctx, config);
}

SmootherRun run_smoother(const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta,
                         const std::vector<Vector>& ys, double dt, const SmootherConfig& config, const Vector* y0) {
  SmootherRun run;
  run.final_state = init_filter(dyn, fn, theta, y0, config);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    StepContext ctx;
    ctx.k = static_cast<int>(k) + 1;
    ctx.y = &ys[k];
    ctx.y_prev = k > 0 ? &ys[k - 1] : y0;
    ctx.horizon = dt;
    smoother_step(run.final_state, dyn, fn, theta, ctx, config);
    run.estimates.push_back(run.final_state.estimate);
    run.increments.push_back(run.final_state.last_increment);
  }
  return run;
}

// --- pathspace dynamics -----------------------------------------------------

PathspaceDynamics::PathspaceDynamics(ModelPtr model, Construct construct, int grid, DensityScheme scheme,
                                     SimulationOptions simulation)
    : model_(std::move(model)), construct_(construct), grid_(grid), scheme_(scheme), simulation_(simulation) {
  if (!model_) throw ConfigError("no model given");
  if (grid_ < 2) throw ConfigError("pathspace dynamics need at least 2 grid steps");
  if (construct_ == Construct::continuous && model_->has_jumps()) {
    throw ConfigError("model '" + model_->name() + "' has jumps; pick construct one or two");
  }
  if (construct_ == Construct::one && model_->observation_uses_path()) {
    throw ConfigError("construct one does not support path-dependent observations");
  }
}

Vector PathspaceDynamics::sample_initial(const Vector& theta, Rng& rng) const {
  return model_->sample_initial(theta, rng);
}

void PathspaceDynamics::propagate(const Vector& theta, const StepContext& ctx, const Particle& prev, Particle& out,
                                  Rng& rng) const {
  AugmentOptions opts;
  opts.scheme = scheme_;
  opts.simulation = simulation_;
  opts.keep_path = model_->observation_uses_path();
  out.aug = sample_transition(construct_, *model_, theta, prev.x, ctx.horizon, grid_, rng, opts);
  out.x = out.aug.endpoint;
}

template <typename S>
S PathspaceDynamics::obs_impl(const ParamVector<S>& theta, const StepContext& ctx, const Particle& cur) const {
  if (model_->observation_uses_path()) {
    PathMatrix<S> states = cur.aug.path.template cast<S>();
    PathView<S> view{states, ctx.horizon / grid_};
    return model_->obs_logdensity(theta, *ctx.y, ctx.y_prev, view);
  }
  PathMatrix<S> end = cur.x.transpose().template cast<S>();
  PathView<S> view{end, ctx.horizon};
  return model_->obs_logdensity(theta, *ctx.y, ctx.y_prev, view);
}

template <typename S>
S PathspaceDynamics::pair_impl(const ParamVector<S>& theta, const StepContext& ctx, const Particle& prev,
                               const Particle& cur, bool with_obs) const {
  if (with_obs && model_->observation_uses_path()) {
    PathMatrix<S> path;
    const S lp = transition_logdensity<S>(*model_, theta, prev.x, cur.aug, scheme_, &path);
    PathView<S> view{path, ctx.horizon / grid_};
    return lp + model_->obs_logdensity(theta, *ctx.y, ctx.y_prev, view);
  }
  return transition_logdensity<S>(*model_, theta, prev.x, cur.aug, scheme_);
}

double PathspaceDynamics::log_obs(const Vector& theta, const StepContext& ctx, const Particle& cur) const {
  return obs_impl<double>(ParamVector<double>(theta), ctx, cur);
}

double PathspaceDynamics::log_obs_initial(const Vector& theta, const Vector& y0, const Vector& x0) const {
  PathMatrix<double> end = x0.transpose();
  PathView<double> view{end, 0.0};
  return model_->obs_logdensity(ParamVector<double>(theta), y0, nullptr, view);
}

double PathspaceDynamics::log_pair(const Vector& theta, const StepContext& ctx, const Particle& prev,
                                   const Particle& cur, bool with_obs) const {
  return pair_impl<double>(ParamVector<double>(theta), ctx, prev, cur, with_obs);
}

Dual PathspaceDynamics::log_pair_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& prev,
                                      const Particle& cur, bool with_obs) const {
  return pair_impl<Dual>(theta, ctx, prev, cur, with_obs);
}

Dual PathspaceDynamics::log_obs_dual(const ParamVector<Dual>& theta, const StepContext& ctx,
                                     const Particle& cur) const {
  return obs_impl<Dual>(theta, ctx, cur);
}

bool PathspaceDynamics::in_domain(const Vector& theta) const {
  if (!theta.allFinite()) return false;
  const auto& doms = model_->info().domains;
  for (int i = 0; i < theta.size(); ++i) {
    if (doms[i].kind == ParamDomain::Kind::positive && !(theta(i) > 0.0)) return false;
  }
  return true;
}

// --- naive grid dynamics ----------------------------------------------------

EulerGridDynamics::EulerGridDynamics(ModelPtr model, int grid) : model_(std::move(model)), grid_(grid) {
  if (!model_) throw ConfigError("no model given");
  if (grid_ < 1) throw ConfigError("grid size must be at least 1");
  if (model_->has_jumps()) throw ConfigError("the grid baseline covers continuous models only");
}

Vector EulerGridDynamics::endpoint(const Vector& state) const {
  const int d = model_->dim_x();
  return state.tail(d);
}

Vector EulerGridDynamics::sample_initial(const Vector& theta, Rng& rng) const {
  return model_->sample_initial(theta, rng);
}

void EulerGridDynamics::propagate(const Vector& theta, const StepContext& ctx, const Particle& prev, Particle& out,
                                  Rng& rng) const {
  const PathSegment seg = simulate_path_with_jumps(*model_, theta, endpoint(prev.x), ctx.horizon, grid_, {}, rng);
  const PathMatrix<double> rows = seg.states;
  out.x = Eigen::Map<const Vector>(rows.data(), rows.size());
  out.aug = AugmentedTransition{};
  out.aug.horizon = ctx.horizon;
  out.aug.endpoint = seg.endpoint();
}

template <typename S>
S EulerGridDynamics::pair_impl(const ParamVector<S>& theta, double horizon, const Vector& x_prev_end,
                               const Vector& state) const {
  const int d = model_->dim_x();
  const int M = static_cast<int>(state.size() / d) - 1;
  const double dt = horizon / M;
  if (d == 1) {
    using std::log;
    constexpr double kLog2Pi = 1.8378770664093454835606594728112;
    State<S> X(1), b(1);
    SquareMatrix<S> sig(1, 1);
    X(0) = S(x_prev_end(0));
    S acc(0.0);
    for (int m = 0; m < M; ++m) {
      model_->drift(theta, X, b);
      model_->diffusion(theta, X, sig);
      const S var = sig(0, 0) * sig(0, 0) * dt;
      if (!(value_of(var) > 0.0)) throw DiffusionDegeneracyError("diffusion covariance is not positive definite");
      const S r = S(state(m + 1)) - X(0) - b(0) * dt;
      acc -= 0.5 * (kLog2Pi + log(var)) + r * r / (2.0 * var);
      X(0) = S(state(m + 1));
    }
    return acc;
  }
  State<S> X = lift_state<S>(x_prev_end);
  State<S> b(d), r(d);
  SquareMatrix<S> sig(d, model_->dim_w());
  SpdFactor<S> fac;
  S acc(0.0);
  for (int m = 0; m < M; ++m) {
    model_->drift(theta, X, b);
    model_->diffusion(theta, X, sig);
    fac.compute_from_diffusion(sig);
    for (int c = 0; c < d; ++c) r(c) = S(state((m + 1) * d + c)) - X(c) - b(c) * dt;
    acc += fac.log_normal(r, dt);
    X = lift_state<S>(state.segment((m + 1) * d, d));
  }
  return acc;
}

template <typename S>
S EulerGridDynamics::obs_impl(const ParamVector<S>& theta, const StepContext& ctx, const Vector& state) const {
  const int d = model_->dim_x();
  const int rows = static_cast<int>(state.size() / d);
  PathMatrix<S> path(rows, d);
  for (int m = 0; m < rows; ++m)
    for (int c = 0; c < d; ++c) path(m, c) = S(state(m * d + c));
  if (!model_->observation_uses_path()) {
    PathMatrix<S> end = path.bottomRows(1);
    PathView<S> view{end, ctx.horizon};
    return model_->obs_logdensity(theta, *ctx.y, ctx.y_prev, view);
  }
  PathView<S> view{path, ctx.horizon / std::max(rows - 1, 1)};
  return model_->obs_logdensity(theta, *ctx.y, ctx.y_prev, view);
}

double EulerGridDynamics::log_obs(const Vector& theta, const StepContext& ctx, const Particle& cur) const {
  return obs_impl<double>(ParamVector<double>(theta), ctx, cur.x);
}

double EulerGridDynamics::log_obs_initial(const Vector& theta, const Vector& y0, const Vector& x0) const {
  PathMatrix<double> end = x0.transpose();
  PathView<double> view{end, 0.0};
  return model_->obs_logdensity(ParamVector<double>(theta), y0, nullptr, view);
}

double EulerGridDynamics::log_pair(const Vector& theta, const StepContext& ctx, const Particle& prev,
                                   const Particle& cur, bool) const {
  return pair_impl<double>(ParamVector<double>(theta), ctx.horizon, endpoint(prev.x), cur.x);
}

Dual EulerGridDynamics::log_pair_dual(const ParamVector<Dual>& theta, const StepContext& ctx, const Particle& prev,
                                      const Particle& cur, bool) const {
  return pair_impl<Dual>(theta, ctx.horizon, endpoint(prev.x), cur.x);
}

Dual EulerGridDynamics::log_obs_dual(const ParamVector<Dual>& theta, const StepContext& ctx,
                                     const Particle& cur) const {
  return obs_impl<Dual>(theta, ctx, cur.x);
}

bool EulerGridDynamics::in_domain(const Vector& theta) const {
  if (!theta.allFinite()) return false;
  const auto& doms = model_->info().domains;
  for (int i = 0; i < theta.size(); ++i) {
    if (doms[i].kind == ParamDomain::Kind::positive && !(theta(i) > 0.0)) return false;
  }
  return true;
}

}  // namespace pathsmooth
