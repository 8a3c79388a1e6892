#include "pathsmooth/bridge.hpp"

#include "pathsmooth/simulate.hpp"

#include <cmath>

namespace pathsmooth {

namespace {

void check_bridge_inputs(const SdeModel& model, const NoisePath& noise) {
  if (model.dim_w() != model.dim_x()) {
    throw DiffusionDegeneracyError("bridging requires a square diffusion (d_w = d_x) for model '" + model.name() +
                                   "'");
  }
  if (noise.grid < 2) throw ConfigError("a bridge needs at least 2 grid steps");
  if (noise.increments.rows() != noise.grid - 1 || noise.increments.cols() != model.dim_w()) {
    throw ConfigError("noise path has the wrong shape for its grid");
  }
}

}  // namespace

State<double> GridJumps::cumulative(int j, int dim) const {
  State<double> acc = State<double>::Zero(dim);
  for (std::size_t k = 0; k < index.size() && index[k] <= j; ++k) acc += size[k];
  return acc;
}

GridJumps snap_jumps(const JumpSet& jumps, double horizon, int grid, int dim) {
  GridJumps out;
  out.index.reserve(jumps.size());
  out.size.reserve(jumps.size());
  for (const auto& ev : jumps) {
    if (ev.size.size() != dim) throw ConfigError("jump size has the wrong dimension");
    out.index.push_back(jump_grid_index(ev.time, horizon, grid));
    out.size.emplace_back(ev.size);
  }
  return out;
}

template <typename S>
S log_phi_t(const SdeModel& model, const ParamVector<S>& th, const PathMatrix<S>& path,
            const Eigen::Ref<const Vector>& xp, double horizon) {
  const int d = model.dim_x();
  const int M = static_cast<int>(path.rows()) - 1;
  if (M < 1) throw ConfigError("path needs at least one step");
  const double dt = horizon / M;

  State<S> X(d), b(d), dX(d), u(d), u_next(d);
  SquareMatrix<S> sig(d, model.dim_w()), inv(d, d), inv_prev(d, d);
  SpdFactor<S> fac;
  S ito(0.0), quad(0.0), cov_term(0.0), qv_term(0.0);

  for (int j = 0; j < M; ++j) {
    X = path.row(j).transpose();
    model.drift(th, X, b);
    model.diffusion(th, X, sig);
    fac.compute_from_diffusion(sig);
    inv = fac.inverse();
    dX = (path.row(j + 1) - path.row(j)).transpose();
    ito += fac.inner(b, dX);
    quad += fac.quad(b) * dt;

    if (j >= 1) {
      // terms for step j - 1, which never reaches the final step
      const double w = 1.0 / (horizon - (j - 1) * dt);
      for (int k = 0; k < d; ++k) {
        u(k) = S(xp(k)) - path(j - 1, k);
        u_next(k) = S(xp(k)) - path(j, k);
      }
      const SquareMatrix<S> dinv = inv - inv_prev;
      cov_term += u.dot(dinv * u) * w;
      S acc(0.0);
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) acc += dinv(a, c) * (u_next(a) * u_next(c) - u(a) * u(c));
      qv_term += acc * w;
    }
    inv_prev = inv;
  }
  return ito - 0.5 * quad - 0.5 * cov_term - 0.5 * qv_term;
}

template <typename S>
S scalar_bridge(const SdeModel& model, const ParamVector<S>& th, double x, double xp, const NoisePath& noise,
                const GridJumps* jumps, PathMatrix<S>* path) {
  using std::log;
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const int M = noise.grid;
  const double T = noise.horizon;
  const double dt = T / M;
  const bool jumped = jumps && !jumps->empty();
  if (path) path->resize(M + 1, 1);

  State<S> X(1), b(1);
  SquareMatrix<S> sig(1, 1);
  double target = xp;
  double jt = 0.0;
  std::size_t next_jump = 0;
  if (jumped) target -= jumps->cumulative(M, 1)(0);
  X(0) = S(x);
  if (path) (*path)(0, 0) = X(0);

  S acc(0.0);
  for (int j = 0; j < M - 1; ++j) {
    model.drift(th, X, b);
    model.diffusion(th, X, sig);
    const S s = sig(0, 0);
    if (!(std::abs(value_of(s)) > 0.0) || !std::isfinite(value_of(s))) {
      throw DiffusionDegeneracyError("diffusion covariance is not symmetric positive definite");
    }
    const S inv_s = 1.0 / s;
    const S g = (S(target + jt) - X(0)) * (1.0 / (T - j * dt));
    const double z = noise.increments(j, 0);
    acc -= g * inv_s * (0.5 * dt * g * inv_s + z);
    X(0) += (b(0) + g) * dt + s * z;
    if (jumped) {
      while (next_jump < jumps->index.size() && jumps->index[next_jump] == j + 1) {
        X(0) += jumps->size[next_jump](0);
        jt += jumps->size[next_jump](0);
        ++next_jump;
      }
    }
    if (path) (*path)(j + 1, 0) = X(0);
  }
  model.drift(th, X, b);
  model.diffusion(th, X, sig);
  const S var = sig(0, 0) * sig(0, 0) * dt;
  if (!(value_of(var) > 0.0) || !std::isfinite(value_of(var))) {
    throw DiffusionDegeneracyError("diffusion covariance is not symmetric positive definite");
  }
  double last_jump = 0.0;
  if (jumped) {
    for (; next_jump < jumps->index.size(); ++next_jump) last_jump += jumps->size[next_jump](0);
  }
  const S r = S(xp - last_jump) - X(0) - b(0) * dt;
  if (path) (*path)(M, 0) = S(xp);
  return acc - 0.5 * (kLog2Pi + log(var)) - r * r / (2.0 * var);
}

template <typename S>
S bridge_logdensity(const SdeModel& model, const ParamVector<S>& th, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& xp, const NoisePath& noise, DensityScheme scheme,
                    const GridJumps* jumps, PathMatrix<S>* path) {
  check_bridge_inputs(model, noise);
  const bool jumped = jumps && !jumps->empty();
  if (scheme == DensityScheme::girsanov && jumped) {
    throw ConfigError("the girsanov scheme is only defined for continuous bridges");
  }
  const int d = model.dim_x();
  const int M = noise.grid;
  const double T = noise.horizon;
  const double dt = T / M;

  if (d == 1 && scheme == DensityScheme::euler_ratio) return scalar_bridge<S>(model, th, x(0), xp(0), noise, jumps, path);

  PathMatrix<S> local;
  PathMatrix<S>* out = path;
  if (!out && scheme == DensityScheme::girsanov) out = &local;
  if (out) out->resize(M + 1, d);

  State<S> X = lift_state<S>(x);
  State<S> b(d), g(d), w(d), r(d);
  SquareMatrix<S> sig(d, d);
  SpdFactor<S> fac;

  State<double> target = xp;
  State<double> jt = State<double>::Zero(d);
  std::size_t next_jump = 0;
  if (jumped) target -= jumps->cumulative(M, d);
  if (out) out->row(0) = X.transpose();

  S acc(0.0);
  for (int j = 0; j < M - 1; ++j) {
    const double inv_rem = 1.0 / (T - j * dt);
    model.drift(th, X, b);
    model.diffusion(th, X, sig);
    fac.compute_from_diffusion(sig);
    for (int k = 0; k < d; ++k) {
      g(k) = (S(target(k) + jt(k)) - X(k)) * inv_rem;
      S wk(0.0);
      for (int c = 0; c < d; ++c) wk += sig(k, c) * noise.increments(j, c);
      w(k) = wk;
    }
    // numerator residual g dt + sigma Z against denominator residual sigma Z
    acc -= 0.5 * dt * fac.quad(g) + fac.inner(g, w);
    for (int k = 0; k < d; ++k) X(k) += (b(k) + g(k)) * dt + w(k);
    if (jumped) {
      while (next_jump < jumps->index.size() && jumps->index[next_jump] == j + 1) {
        const auto& sz = jumps->size[next_jump];
        for (int k = 0; k < d; ++k) X(k) += sz(k);
        jt += sz;
        ++next_jump;
      }
    }
    if (out) out->row(j + 1) = X.transpose();
  }

  model.drift(th, X, b);
  model.diffusion(th, X, sig);
  fac.compute_from_diffusion(sig);
  State<double> last_jump = State<double>::Zero(d);
  if (jumped) {
    for (; next_jump < jumps->index.size(); ++next_jump) last_jump += jumps->size[next_jump];
  }
  for (int k = 0; k < d; ++k) r(k) = S(xp(k) - last_jump(k)) - X(k) - b(k) * dt;
  if (out) out->row(M) = lift_state<S>(xp).transpose();

  if (scheme == DensityScheme::euler_ratio) return acc + fac.log_normal(r, dt);

  // girsanov: phi * N(x'; x, T Sigma(x)) * |Sigma(x')|^1/2 / |Sigma(x)|^1/2
  const S lphi = log_phi_t(model, th, *out, xp, T);
  State<S> x0 = lift_state<S>(x);
  model.diffusion(th, x0, sig);
  SpdFactor<S> fac0;
  fac0.compute_from_diffusion(sig);
  State<S> xT = lift_state<S>(xp);
  model.diffusion(th, xT, sig);
  fac.compute_from_diffusion(sig);
  for (int k = 0; k < d; ++k) r(k) = S(xp(k) - x(k));
  return lphi + fac0.log_normal(r, T) + 0.5 * fac.logdet() - 0.5 * fac0.logdet();
}

template double bridge_logdensity<double>(const SdeModel&, const ParamVector<double>&, const Eigen::Ref<const Vector>&,
                                          const Eigen::Ref<const Vector>&, const NoisePath&, DensityScheme,
                                          const GridJumps*, PathMatrix<double>*);
template Dual bridge_logdensity<Dual>(const SdeModel&, const ParamVector<Dual>&, const Eigen::Ref<const Vector>&,
                                      const Eigen::Ref<const Vector>&, const NoisePath&, DensityScheme,
                                      const GridJumps*, PathMatrix<Dual>*);
template double log_phi_t<double>(const SdeModel&, const ParamVector<double>&, const PathMatrix<double>&,
                                  const Eigen::Ref<const Vector>&, double);
template Dual log_phi_t<Dual>(const SdeModel&, const ParamVector<Dual>&, const PathMatrix<Dual>&,
                              const Eigen::Ref<const Vector>&, double);

PathSegment bridge_forward_map(const SdeModel& model, const Vector& theta, const NoisePath& noise, const Vector& x,
                               const Vector& xp, const GridJumps* jumps) {
  PathMatrix<double> states;
  const ParamVector<double> th = theta;
  bridge_logdensity<double>(model, th, x, xp, noise, DensityScheme::euler_ratio, jumps, &states);
  PathSegment seg;
  seg.horizon = noise.horizon;
  seg.states = states;
  return seg;
}

NoisePath bridge_inverse_map(const SdeModel& model, const Vector& theta, const PathSegment& path, const Vector& x,
                             const Vector& xp, const GridJumps* jumps) {
  const int d = model.dim_x();
  if (model.dim_w() != d) {
    throw DiffusionDegeneracyError("bridging requires a square diffusion (d_w = d_x) for model '" + model.name() +
                                   "'");
  }
  const int M = path.grid();
  if (M < 2) throw ConfigError("a bridge needs at least 2 grid steps");
  const double T = path.horizon;
  const double dt = T / M;
  const ParamVector<double> th = theta;
  const bool jumped = jumps && !jumps->empty();

  NoisePath noise;
  noise.horizon = T;
  noise.grid = M;
  noise.increments.resize(M - 1, d);

  State<double> target = xp;
  State<double> jt = State<double>::Zero(d);
  if (jumped) target -= jumps->cumulative(M, d);
  std::size_t next_jump = 0;

  State<double> X(d), b(d), r(d);
  SquareMatrix<double> sig(d, d);
  SpdFactor<double> fac;
  (void)x;
  for (int j = 0; j < M - 1; ++j) {
    X = path.states.row(j).transpose();
    model.drift(th, X, b);
    model.diffusion(th, X, sig);
    fac.compute_from_diffusion(sig);
    State<double> dj = State<double>::Zero(d);
    if (jumped) {
      while (next_jump < jumps->index.size() && jumps->index[next_jump] == j + 1) dj += jumps->size[next_jump++];
    }
    const double inv_rem = 1.0 / (T - j * dt);
    for (int k = 0; k < d; ++k) {
      const double g = (target(k) + jt(k) - X(k)) * inv_rem;
      r(k) = path.states(j + 1, k) - X(k) - dj(k) - (b(k) + g) * dt;
    }
    jt += dj;
    if (d == 1) {
      noise.increments(j, 0) = r(0) / sig(0, 0);
    } else {
      noise.increments.row(j) = (sig.transpose() * fac.solve(r)).transpose();
    }
  }
  return noise;
}

double log_phi(const SdeModel& model, const Vector& theta, const PathSegment& path, const Vector& x,
               const Vector& xp) {
  (void)x;
  const ParamVector<double> th = theta;
  const PathMatrix<double> states = path.states;
  return log_phi_t<double>(model, th, states, xp, path.horizon);
}

double log_pathspace_density(const SdeModel& model, const Vector& theta, const Vector& x, const Vector& xp,
                             const NoisePath& noise, DensityScheme scheme) {
  const ParamVector<double> th = theta;
  return bridge_logdensity<double>(model, th, x, xp, noise, scheme);
}

NoisePath sample_noise(int dim_w, double horizon, int grid, Rng& rng) {
  NoisePath noise;
  noise.horizon = horizon;
  noise.grid = grid;
  noise.increments.resize(std::max(grid - 1, 0), dim_w);
  const double sd = std::sqrt(horizon / grid);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < noise.increments.rows(); ++j)
    for (int k = 0; k < dim_w; ++k) noise.increments(j, k) = sd * normal(rng);
  return noise;
}

}  // namespace pathsmooth
