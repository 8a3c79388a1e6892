#include "pathsmooth/rml.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pathsmooth {

bool GradSpec::active(int i) const {
  return mask.empty() || std::find(mask.begin(), mask.end(), i) != mask.end();
}

namespace {

// Derivative directions only for the active coordinates, in index order.
ParamVector<Dual> lift_masked(const Vector& theta, const GradSpec& grad, std::vector<int>& slots) {
  const int p = static_cast<int>(theta.size());
  if (p > kMaxParams) throw ConfigError("parameter dimension exceeds kMaxParams");
  slots.assign(p, -1);
  int q = 0;
  for (int i = 0; i < p; ++i)
    if (grad.active(i)) slots[i] = q++;
  ParamVector<Dual> out(p);
  for (int i = 0; i < p; ++i) {
    out(i) = slots[i] >= 0 ? Dual(theta(i), q, slots[i]) : Dual(theta(i), Gradient::Zero(q));
  }
  return out;
}

std::string coordinate_error(int i, double v) {
  std::ostringstream os;
  os << "non-finite gradient in coordinate " << i << " (value " << v << ")";
  return os.str();
}

}  // namespace

double ScoreFunctional::differentiate(const Dynamics& dyn, const Vector& theta,
                                      const std::function<double(const Vector&)>& f,
                                      const std::function<Dual(const ParamVector<Dual>&)>& fd,
                                      Eigen::Ref<Vector> out) const {
  out.setZero();
  if (grad_.mode == GradSpec::Mode::analytic) {
    std::vector<int> slots;
    const Dual v = fd(lift_masked(theta, grad_, slots));
    for (int i = 0; i < dim_; ++i) {
      if (slots[i] < 0) continue;
      const double g = v.derivatives().size() > slots[i] ? v.derivatives()(slots[i]) : 0.0;
      if (!std::isfinite(g) && std::isfinite(v.value())) throw NumericalError(coordinate_error(i, g));
      out(i) = g;
    }
    return v.value();
  }
  const double f0 = f(theta);
  if (!std::isfinite(f0)) return f0;
  for (int i = 0; i < dim_; ++i) {
    if (!grad_.active(i)) continue;
    double h = grad_.rel_step * std::max(1.0, std::abs(theta(i)));
    Vector tp = theta, tm = theta;
    tm(i) -= h;
    if (!dyn.in_domain(tm)) {
      h = 0.5 * std::abs(theta(i));
      tm(i) = theta(i) - h;
    }
    tp(i) = theta(i) + h;
    const double g = (f(tp) - f(tm)) / (2.0 * h);
    if (!std::isfinite(g)) throw NumericalError(coordinate_error(i, g));
    out(i) = g;
  }
  return f0;
}

Vector ScoreFunctional::initial(const Dynamics& dyn, const Vector& theta, const Vector& x0, const Vector* y0) const {
  Vector out = Vector::Zero(dim_);
  if (!y0) return out;
  // the initial law is treated as theta-free
  differentiate(
      dyn, theta, [&](const Vector& t) { return dyn.log_obs_initial(t, *y0, x0); },
      [&](const ParamVector<Dual>&) -> Dual {
        throw ConfigError("analytic gradient of the initial observation is not available");
      },
      out);
  return out;
}

void ScoreFunctional::particle_term(const Dynamics& dyn, const Vector& theta, const StepContext& ctx,
                                    const Particle& cur, Eigen::Ref<Vector> out) const {
  if (dyn.obs_in_pair()) {
    out.setZero();
    return;
  }
  differentiate(
      dyn, theta, [&](const Vector& t) { return dyn.log_obs(t, ctx, cur); },
      [&](const ParamVector<Dual>& t) { return dyn.log_obs_dual(t, ctx, cur); }, out);
}

double ScoreFunctional::pair(const Dynamics& dyn, const Vector& theta, const StepContext& ctx, const Particle& prev,
                             const Particle& cur, Eigen::Ref<Vector> s) const {
  const bool with_obs = dyn.obs_in_pair();
  return differentiate(
      dyn, theta, [&](const Vector& t) { return dyn.log_pair(t, ctx, prev, cur, with_obs); },
      [&](const ParamVector<Dual>& t) { return dyn.log_pair_dual(t, ctx, prev, cur, with_obs); }, s);
}

std::unique_ptr<ScoreFunctional> make_score_functional(const Dynamics& dyn, GradSpec grad) {
  if (grad.mode == GradSpec::Mode::analytic && !dyn.has_dual()) {
    throw ConfigError("analytic gradients need dynamics with forward-mode support");
  }
  for (int i : grad.mask) {
    if (i < 0 || i >= dyn.dim_theta()) throw ConfigError("gradient mask index out of range");
  }
  return std::make_unique<ScoreFunctional>(dyn.dim_theta(), std::move(grad));
}

Vector score_increment(const ModelPtr& model, const Vector& theta, const StepContext& ctx, const Vector& x_prev,
                       const AugmentedTransition& aug, const GradSpec& grad, DensityScheme scheme) {
  const int grid = aug.kind == Construct::one ? std::max(2, aug.segment_noise.empty() ? 2 : aug.segment_noise[0].grid)
                                              : aug.noise.grid;
  PathspaceDynamics dyn(model, aug.kind, grid, scheme);
  auto fn = make_score_functional(dyn, grad);
  Particle prev, cur;
  prev.x = x_prev;
  cur.aug = aug;
  cur.x = aug.endpoint;
  Vector s(fn->dim());
  if (!ctx.y) {
    // transition part only
    fn->differentiate(
        dyn, theta, [&](const Vector& t) { return dyn.log_pair(t, ctx, prev, cur, false); },
        [&](const ParamVector<Dual>& t) { return dyn.log_pair_dual(t, ctx, prev, cur, false); }, s);
    return s;
  }
  Vector g(fn->dim());
  fn->pair(dyn, theta, ctx, prev, cur, s);
  fn->particle_term(dyn, theta, ctx, cur, g);
  return s + g;
}

AdamState make_adam(int dim) {
  AdamState st;
  st.m = Vector::Zero(dim);
  st.v = Vector::Zero(dim);
  return st;
}

Vector adam_update(AdamState& st, const Vector& c) {
  if (st.m.size() != c.size()) {
    st.m = Vector::Zero(c.size());
    st.v = Vector::Zero(c.size());
  }
  ++st.n;
  st.m = st.beta1 * st.m + (1.0 - st.beta1) * c;
  st.v = st.beta2 * st.v + (1.0 - st.beta2) * c.cwiseProduct(c);
  const double b1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.n));
  const double b2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.n));
  const Vector mhat = st.m / b1;
  const Vector vhat = st.v / b2;
  return (-st.alpha * mhat.array() / (vhat.array().sqrt() + st.eps)).matrix();
}

Vector to_unconstrained(const SdeModel& model, const Vector& theta) {
  Vector u = theta;
  const auto& doms = model.info().domains;
  for (int i = 0; i < theta.size(); ++i) {
    if (doms[i].kind == ParamDomain::Kind::positive) u(i) = std::log(theta(i));
  }
  return u;
}

Vector from_unconstrained(const SdeModel& model, const Vector& u) {
  Vector theta = u;
  const auto& doms = model.info().domains;
  for (int i = 0; i < u.size(); ++i) {
    if (doms[i].kind == ParamDomain::Kind::positive) theta(i) = std::exp(u(i));
    if (doms[i].kind == ParamDomain::Kind::periodic) theta(i) = doms[i].wrap(u(i));
  }
  return theta;
}

Vector unconstrained_jacobian(const SdeModel& model, const Vector& theta) {
  Vector j = Vector::Ones(theta.size());
  const auto& doms = model.info().domains;
  for (int i = 0; i < theta.size(); ++i) {
    if (doms[i].kind == ParamDomain::Kind::positive) j(i) = theta(i);
  }
  return j;
}

FitResult online_gradient_ascent(const ModelPtr& model, const std::vector<Vector>& ys, const Vector& theta0,
                                 const FitConfig& config) {
  check_parameters(*model, theta0);
  PathspaceDynamics dyn(model, config.construct, config.grid, config.scheme);
  auto fn = make_score_functional(dyn, config.grad);

  FitResult out;
  Vector theta = theta0;
  if (!model->admissible(theta)) {
    theta = model->project(theta);
    out.warnings.push_back("initial theta violates the model constraint; projected");
  }
  out.trajectory.push_back(theta);

  AdamState adam = config.adam;
  adam.m = Vector::Zero(theta.size());
  adam.v = Vector::Zero(theta.size());
  adam.n = 0;

  out.final_state = init_filter(dyn, *fn, theta, nullptr, config.smoother);
  Vector previous = out.final_state.estimate;
  Vector u = to_unconstrained(*model, theta);

  for (std::size_t k = 0; k < ys.size(); ++k) {
    StepContext ctx;
    ctx.k = static_cast<int>(k) + 1;
    ctx.y = &ys[k];
    ctx.y_prev = k > 0 ? &ys[k - 1] : nullptr;
    ctx.horizon = config.dt;
    smoother_step(out.final_state, dyn, *fn, theta, ctx, config.smoother);

    const Vector score = out.final_state.estimate - previous;
    previous = out.final_state.estimate;
    const Vector grad_u = score.cwiseProduct(unconstrained_jacobian(*model, theta));

    if (config.optimizer == FitConfig::Optimizer::adam) {
      u += adam_update(adam, -grad_u);
    } else {
      const double gamma = config.gamma0 * std::pow(static_cast<double>(k + 1), -0.6);
      u += gamma * grad_u;
    }

    for (int i = 0; i < u.size(); ++i) {
      if (!std::isfinite(u(i)) || std::abs(u(i)) > config.divergence_bound) {
        std::ostringstream os;
        os << "parameter iterate diverged at observation " << k + 1 << ": coordinate "
           << model->info().param_names[i] << " (transformed value " << u(i) << "), last theta = "
           << theta.transpose();
        throw DivergenceError(os.str());
      }
    }
    theta = from_unconstrained(*model, u);
    if (!model->admissible(theta)) {
      theta = model->project(theta);
      std::ostringstream os;
      os << "observation " << k + 1 << ": theta left the admissible set, projected to " << theta.transpose();
      out.warnings.push_back(os.str());
    }
    // keep the optimiser coordinates in step with wrapping and projection
    u = to_unconstrained(*model, theta);

    out.trajectory.push_back(theta);
    out.increments.push_back(out.final_state.last_increment);
    out.loglik += out.final_state.last_increment;
    if (config.on_step) config.on_step(ctx.k, theta, out.final_state.last_increment);
  }
  return out;
}

}  // namespace pathsmooth
