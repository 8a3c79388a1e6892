#include "pathsmooth/validation.hpp"

#include "pathsmooth/dataset.hpp"
#include "pathsmooth/model_select.hpp"
#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"
#include "pathsmooth/stats.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace pathsmooth {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::vector<double> column(const std::vector<Vector>& rows, int i) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r(i));
  return out;
}

// check ids used to derive independent seed families
enum : std::uint64_t {
  kMesh = 1,
  kScore,
  kBridge,
  kRoundTrip,
  kConstruct,
  kRecovery,
  kMeshFit,
  kConsistency,
  kBic,
  kUnits
};

}  // namespace

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t check, std::uint64_t r) {
  Rng rng = make_stream(master, {check, r});
  return rng();
}

std::vector<Vector> score_replicates(const Dynamics& dyn, const AdditiveFunctional& fn, const Vector& theta,
                                     const std::vector<Vector>& ys, double dt, int particles, int replicates,
                                     std::uint64_t master, std::uint64_t check, int workers) {
  std::vector<Vector> out;
  out.reserve(replicates);
  for (int r = 0; r < replicates; ++r) {
    SmootherConfig cfg;
    cfg.particles = particles;
    cfg.workers = workers;
    cfg.seed = replicate_seed(master, check, static_cast<std::uint64_t>(r));
    out.push_back(run_smoother(dyn, fn, theta, ys, dt, cfg).final_state.estimate);
  }
  return out;
}

std::vector<Vector> simulate_ou_observations(const Vector& theta, double obs_sd, int n, int data_grid, Rng& rng,
                                             double jump_rate, double jump_halfwidth) {
  ModelOptions opts;
  opts.obs_sd = obs_sd;
  opts.jump_rate = jump_rate;
  opts.jump_halfwidth = jump_halfwidth;
  OrnsteinUhlenbeckModel model(opts);
  return simulate_dataset(model, theta, n, 1.0, data_grid, rng).ys;
}

// ---------------------------------------------------------------------------

CheckResult check_mesh_robustness(const MeshRobustnessConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "mesh robustness";
  Rng rng = make_stream(cfg.seed, {kMesh, 0});
  const auto ys = simulate_ou_observations(cfg.theta, cfg.obs_sd, cfg.n, cfg.data_grid, rng);

  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  ModelPtr model = make_model("ou", opts);
  GradSpec grad;
  grad.mask = {cfg.coordinate};

  auto spread = [&](const Dynamics& dyn, std::uint64_t family) {
    auto fn = make_score_functional(dyn, grad);
    const auto est = score_replicates(dyn, *fn, cfg.theta, ys, 1.0, cfg.particles, cfg.replicates, cfg.seed,
                                      kMesh * 100 + family, cfg.workers);
    return iqr(column(est, cfg.coordinate));
  };

  const double path_coarse = spread(PathspaceDynamics(model, Construct::continuous, cfg.coarse), 1);
  const double path_fine = spread(PathspaceDynamics(model, Construct::continuous, cfg.fine), 2);
  const double naive_coarse = spread(EulerGridDynamics(model, cfg.coarse), 3);
  const double naive_fine = spread(EulerGridDynamics(model, cfg.fine), 4);

  const double path_ratio = path_fine / path_coarse;
  const double naive_ratio = naive_fine / naive_coarse;
  const bool path_ok = path_ratio <= cfg.max_ratio * cfg.tolerance_scale;
  const bool naive_ok = cfg.tolerance_scale > 0.0 && naive_ratio >= cfg.min_naive_ratio / cfg.tolerance_scale;
  res.passed = path_ok && naive_ok;
  res.metrics = {{"pathspace_iqr_coarse", path_coarse}, {"pathspace_iqr_fine", path_fine},
                 {"pathspace_ratio", path_ratio},       {"naive_iqr_coarse", naive_coarse},
                 {"naive_iqr_fine", naive_fine},        {"naive_ratio", naive_ratio}};
  res.summary = "IQR ratio M=" + std::to_string(cfg.fine) + "/M=" + std::to_string(cfg.coarse) +
                ": pathspace " + fmt(path_ratio) + " (<= " + fmt(cfg.max_ratio * cfg.tolerance_scale) +
                "), naive " + fmt(naive_ratio, 7) + " (>= " + fmt(cfg.min_naive_ratio / cfg.tolerance_scale) + ")";
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_score_vs_kalman(const ScoreOracleConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "score vs Kalman oracle";
  Rng rng = make_stream(cfg.seed, {kScore, 0});
  const auto ys = simulate_ou_observations(cfg.theta, cfg.obs_sd, cfg.n, cfg.data_grid, rng);

  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  ModelPtr model = make_model("ou", opts);
  const double x0 = model->sample_initial(cfg.theta, rng)(0);
  // the smoother targets the likelihood of the Euler scheme it propagates
  // with; the composed Euler transition is still linear-Gaussian
  const auto euler = kalman_loglik_and_score(ou_linear_gaussian(1.0, cfg.obs_sd, x0, cfg.grid), cfg.theta, ys);
  const auto exact = kalman_loglik_and_score(ou_linear_gaussian(1.0, cfg.obs_sd, x0, 0), cfg.theta, ys);

  PathspaceDynamics dyn(model, Construct::continuous, cfg.grid);
  GradSpec grad;
  grad.mask = {cfg.coordinate};
  auto fn = make_score_functional(dyn, grad);
  const auto est =
      score_replicates(dyn, *fn, cfg.theta, ys, 1.0, cfg.particles, cfg.replicates, cfg.seed, kScore, cfg.workers);
  const auto s = column(est, cfg.coordinate);
  const double m = mean(s), se = standard_error(s);
  const double target = euler.score(cfg.coordinate);
  const double half = cfg.z_interval * se * cfg.tolerance_scale;
  res.passed = std::abs(m - target) <= half;
  res.metrics = {{"particle_mean", m},
                 {"particle_se", se},
                 {"kalman_score", target},
                 {"kalman_score_continuous", exact.score(cfg.coordinate)},
                 {"kalman_loglik", euler.loglik}};
  res.summary = "mean " + fmt(m) + " +/- " + fmt(half) + " vs Kalman " + fmt(target) + " (continuous-time " +
                fmt(exact.score(cfg.coordinate)) + ")";
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_bridge_unbiasedness(const BridgeUnbiasednessConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "bridge density unbiasedness";
  ModelPtr model = make_model("ou");
  const Vector x = Vector::Constant(1, cfg.x);
  bool ok = true;
  std::ostringstream summary;
  for (std::size_t e = 0; e < cfg.endpoints.size(); ++e) {
    const Vector xp = Vector::Constant(1, cfg.endpoints[e]);
    Rng rng = make_stream(cfg.seed, {kBridge, e});
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < cfg.draws; ++r) {
      const NoisePath z = sample_noise(1, cfg.horizon, cfg.grid, rng);
      const double w = std::exp(log_pathspace_density(*model, cfg.theta, x, xp, z, cfg.scheme));
      s += w;
      s2 += w * w;
    }
    const double m = s / cfg.draws;
    const double se = std::sqrt(std::max(0.0, s2 / cfg.draws - m * m) / cfg.draws);
    const double exact = std::exp(ou_exact_transition(cfg.theta, cfg.x, cfg.endpoints[e], cfg.horizon));
    const double z = (m - exact) / se;
    ok = ok && std::abs(z) <= cfg.z_bound * cfg.tolerance_scale;
    // diagnostic only: the Euler transition on the same grid, which the
    // euler_ratio density is unbiased for
    const auto lg = ou_linear_gaussian(cfg.horizon, 1.0, cfg.x, cfg.grid)(cfg.theta);
    const double ev = lg.Q(0, 0), er = cfg.endpoints[e] - lg.A(0, 0) * cfg.x - lg.c(0);
    const double euler = std::exp(-0.5 * er * er / ev) / std::sqrt(2.0 * std::numbers::pi * ev);
    const std::string tag = "x'=" + fmt(cfg.endpoints[e]);
    res.metrics.push_back({tag + " mean", m});
    res.metrics.push_back({tag + " exact", exact});
    res.metrics.push_back({tag + " z", z});
    res.metrics.push_back({tag + " z_vs_euler_grid", (m - euler) / se});
    summary << (e ? ", " : "") << tag << " z=" << fmt(z, 3);
  }
  res.passed = ok;
  res.summary = summary.str() + " (bound " + fmt(cfg.z_bound * cfg.tolerance_scale) + ")";
  res.seconds = seconds_since(t0);
  return res;
}

namespace {

Vector random_theta(const std::string& name, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto U = [&](double a, double b) { return a + (b - a) * u(rng); };
  if (name == "ou") return (Vector(3) << U(0.1, 2.0), U(-1.0, 1.0), U(0.2, 1.0)).finished();
  if (name == "periodic") return (Vector(2) << U(0.0, 2.0 * std::numbers::pi), U(0.2, 1.5)).finished();
  if (name == "heston") {
    const double a = U(0.5, 2.0), b = U(0.5, 1.5);
    return (Vector(4) << a, b, U(0.1, 0.9) * std::sqrt(2.0 * a * b), U(-0.1, 0.1)).finished();
  }
  const int variant = name[1] - '0';
  Vector th(2 + variant);
  th(0) = U(0.0, 0.5);
  th(1) = U(-0.5, 0.0);
  if (variant >= 2) th(2) = U(0.0, 0.3);
  if (variant >= 3) th(3) = U(0.0, 0.2);
  th(th.size() - 1) = U(0.1, 0.5);
  return th;
}

}  // namespace

CheckResult check_round_trip(const RoundTripConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "round trip and endpoint pinning";
  const std::vector<std::string> names = {"ou", "periodic", "heston", "m1", "m2", "m3", "ou-jumps"};
  Rng rng = make_stream(cfg.seed, {kRoundTrip, 0});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> grid_dist(2, 50);

  double worst = 0.0;
  int pin_failures = 0, redraws = 0, done = 0, with_jumps = 0;
  while (done < cfg.cases) {
    const std::string& name = names[done % names.size()];
    const bool jumps = name == "ou-jumps";
    ModelOptions opts;
    if (jumps) opts.jump_rate = 2.0;
    ModelPtr model = make_model(jumps ? "ou" : name, opts);
    const Vector theta = random_theta(jumps ? "ou" : name, rng);
    const bool positive = name == "heston" || name[0] == 'm';
    const double xv = positive ? 0.5 + 1.5 * u(rng) : 4.0 * u(rng) - 2.0;
    const double xpv = positive ? xv * (0.7 + 0.6 * u(rng)) : xv + 2.0 * u(rng) - 1.0;
    const Vector x = Vector::Constant(1, xv), xp = Vector::Constant(1, xpv);
    const double horizon = 0.2 + 1.8 * u(rng);
    const int grid = grid_dist(rng);
    const NoisePath z = sample_noise(model->dim_w(), horizon, grid, rng);

    GridJumps gj;
    if (jumps) gj = snap_jumps(simulate_jumps(*model, theta, horizon, rng), horizon, grid, 1);
    try {
      const PathSegment path = bridge_forward_map(*model, theta, z, x, xp, jumps ? &gj : nullptr);
      const NoisePath back = bridge_inverse_map(*model, theta, path, x, xp, jumps ? &gj : nullptr);
      for (int d = 0; d < x.size(); ++d)
        if (path.states(grid, d) != xp(d)) ++pin_failures;
      if (path.states.row(0) != x.transpose()) ++pin_failures;
      worst = std::max(worst, (back.increments - z.increments).cwiseAbs().maxCoeff());
    } catch (const DiffusionDegeneracyError&) {
      ++redraws;
      continue;
    }
    if (jumps && !gj.empty()) ++with_jumps;
    ++done;
  }
  res.passed = pin_failures == 0 && worst <= cfg.tolerance * cfg.tolerance_scale;
  res.metrics = {{"cases", static_cast<double>(done)},
                 {"max_abs_increment_error", worst},
                 {"endpoint_mismatches", static_cast<double>(pin_failures)},
                 {"degenerate_redraws", static_cast<double>(redraws)},
                 {"cases_with_jumps", static_cast<double>(with_jumps)}};
  res.summary = std::to_string(done) + " cases, max |dZ| " + fmt(worst, 3) + " (<= " +
                fmt(cfg.tolerance * cfg.tolerance_scale, 3) + "), endpoint mismatches " +
                std::to_string(pin_failures);
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_construct_equivalence(const ConstructEquivalenceConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "construct equivalence";
  Rng rng = make_stream(cfg.seed, {kConstruct, 0});
  const auto ys = simulate_ou_observations(cfg.theta, cfg.obs_sd, cfg.n, cfg.data_grid, rng, cfg.jump_rate,
                                           cfg.jump_halfwidth);
  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  opts.jump_rate = cfg.jump_rate;
  opts.jump_halfwidth = cfg.jump_halfwidth;
  ModelPtr model = make_model("ou", opts);

  PathspaceDynamics one(model, Construct::one, cfg.grid);
  PathspaceDynamics two(model, Construct::two, cfg.grid);
  GradSpec grad;
  grad.mask = cfg.coordinates;
  auto fn = make_score_functional(one, grad);
  const auto a = score_replicates(one, *fn, cfg.theta, ys, 1.0, cfg.particles, cfg.replicates, cfg.seed,
                                  kConstruct * 100 + 1, cfg.workers);
  const auto b = score_replicates(two, *fn, cfg.theta, ys, 1.0, cfg.particles, cfg.replicates, cfg.seed,
                                  kConstruct * 100 + 2, cfg.workers);
  bool ok = cfg.tolerance_scale > 0.0;
  std::ostringstream summary;
  for (std::size_t j = 0; j < cfg.coordinates.size(); ++j) {
    const int i = cfg.coordinates[j];
    const auto ai = column(a, i), bi = column(b, i);
    const auto w = welch_test(ai, bi);
    ok = ok && w.p_value >= cfg.alpha / cfg.tolerance_scale;
    const std::string& pn = model->info().param_names[i];
    res.metrics.push_back({pn + " mean_one", mean(ai)});
    res.metrics.push_back({pn + " mean_two", mean(bi)});
    res.metrics.push_back({pn + " var_one", std::pow(stddev(ai), 2)});
    res.metrics.push_back({pn + " var_two", std::pow(stddev(bi), 2)});
    res.metrics.push_back({pn + " welch_p", w.p_value});
    summary << (j ? "; " : "") << pn << " p=" << fmt(w.p_value, 3) << " var " << fmt(std::pow(stddev(ai), 2), 3)
            << "/" << fmt(std::pow(stddev(bi), 2), 3);
  }
  res.passed = ok;
  res.summary = summary.str() + " (one/two)";
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_parameter_recovery(const RecoveryConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "parameter recovery";
  Rng rng = make_stream(cfg.seed, {kRecovery, 0});
  const auto ys = simulate_ou_observations(cfg.theta, cfg.obs_sd, cfg.n, cfg.data_grid, rng);
  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  ModelPtr model = make_model("ou", opts);

  FitConfig fit;
  fit.grid = cfg.grid;
  fit.smoother.particles = cfg.particles;
  fit.smoother.workers = cfg.workers;
  fit.smoother.seed = replicate_seed(cfg.seed, kRecovery, 1);
  const FitResult out = online_gradient_ascent(model, ys, cfg.theta0, fit);
  const Vector& final = out.trajectory.back();
  const double err = (final - cfg.theta).cwiseAbs().maxCoeff();
  res.passed = err <= cfg.tolerance * cfg.tolerance_scale;
  for (int i = 0; i < final.size(); ++i) res.metrics.push_back({model->info().param_names[i], final(i)});
  res.metrics.push_back({"max_abs_error", err});
  std::ostringstream os;
  os << "theta_n = (" << final.transpose().format(Eigen::IOFormat(4, 0, ", ")) << "), max error " << fmt(err, 3)
     << " (<= " << fmt(cfg.tolerance * cfg.tolerance_scale) << ")";
  res.summary = os.str();
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_mesh_free_fit(const MeshFreeFitConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "mesh-free fitting";
  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  ModelPtr model = make_model("periodic", opts);
  Rng rng = make_stream(cfg.seed, {kMeshFit, 0});
  const auto ys = simulate_dataset(*model, cfg.theta, cfg.n, 1.0, cfg.data_grid, rng).ys;

  auto finals = [&](int grid) {
    std::vector<Vector> out;
    for (int s = 0; s < cfg.seeds; ++s) {
      FitConfig fit;
      fit.grid = grid;
      fit.smoother.particles = cfg.particles;
      fit.smoother.workers = cfg.workers;
      // the same filter seeds on both meshes
      fit.smoother.seed = replicate_seed(cfg.seed, kMeshFit, static_cast<std::uint64_t>(s));
      out.push_back(online_gradient_ascent(model, ys, cfg.theta0, fit).trajectory.back());
    }
    return out;
  };
  const auto coarse = finals(cfg.coarse);
  const auto fine = finals(cfg.fine);
  bool ok = true;
  std::ostringstream summary;
  for (int i = 0; i < model->dim_theta(); ++i) {
    const auto c = column(coarse, i), f = column(fine, i);
    const double gap = std::abs(mean(f) - mean(c)), sd = stddev(c);
    ok = ok && gap < sd * cfg.tolerance_scale;
    const std::string& pn = model->info().param_names[i];
    res.metrics.push_back({pn + " mean_coarse", mean(c)});
    res.metrics.push_back({pn + " mean_fine", mean(f)});
    res.metrics.push_back({pn + " sd_coarse", sd});
    res.metrics.push_back({pn + " sd_fine", stddev(f)});
    summary << (i ? "; " : "") << pn << " M=" << cfg.coarse << " " << fmt(mean(c)) << ", M=" << cfg.fine << " "
            << fmt(mean(f)) << ", gap " << fmt(gap, 3) << (gap < sd * cfg.tolerance_scale ? " < sd " : " >= sd ")
            << fmt(sd * cfg.tolerance_scale, 3);
  }
  res.passed = ok;
  res.summary = summary.str();
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_n_consistency(const NConsistencyConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "N-consistency";
  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  ModelPtr model = make_model("ou", opts);
  Rng rng = make_stream(cfg.seed, {kConsistency, 0});
  const auto ys = simulate_dataset(*model, cfg.theta, cfg.n, 1.0, cfg.grid, rng).ys;

  // S = sum_k x_{k-1} x_k; its smoothed expectation under the Euler
  // scheme the particles use is available from the RTS smoother
  const double x0 = model->sample_initial(cfg.theta, rng)(0);
  const auto lg = ou_linear_gaussian(1.0, cfg.obs_sd, x0, cfg.grid)(cfg.theta);
  const auto sm = rts_smoother(lg, ys);
  double exact = 0.0;
  for (int k = 0; k < cfg.n; ++k) exact += sm.mean[k](0) * sm.mean[k + 1](0) + sm.cross[k](0, 0);

  PathspaceDynamics dyn(model, Construct::continuous, cfg.grid);
  LambdaFunctional fn(1, [](const StepContext&, const Vector& a, const Vector& b, Eigen::Ref<Vector> s) {
    s(0) = a(0) * b(0);
  });
  std::vector<double> medians;
  std::ostringstream summary;
  for (std::size_t j = 0; j < cfg.particles.size(); ++j) {
    const auto est = score_replicates(dyn, fn, cfg.theta, ys, 1.0, cfg.particles[j], cfg.replicates, cfg.seed,
                                      kConsistency * 100 + j, cfg.workers);
    std::vector<double> err;
    for (const auto& e : est) err.push_back(std::abs(e(0) - exact));
    medians.push_back(median(err));
    res.metrics.push_back({"median_abs_error N=" + std::to_string(cfg.particles[j]), medians.back()});
    summary << (j ? ", " : "") << "N=" << cfg.particles[j] << " " << fmt(medians.back(), 3);
  }
  res.metrics.push_back({"exact", exact});
  bool ok = cfg.tolerance_scale > 0.0;
  for (std::size_t j = 1; j < medians.size(); ++j) ok = ok && medians[j] < medians[j - 1] * cfg.tolerance_scale;
  res.passed = ok;
  res.summary = "median |S_hat - S|: " + summary.str() + " (exact S " + fmt(exact) + ")";
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_bic_null(const BicNullConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "BIC machinery";
  ModelOptions opts;
  opts.obs_sd = cfg.obs_sd;
  ModelPtr model = make_model("ou", opts);
  Rng rng = make_stream(cfg.seed, {kBic, 0});
  const auto ys = simulate_dataset(*model, cfg.theta, cfg.n, 1.0, 100, rng).ys;

  std::vector<BicTrack> tracks;
  for (int r = 0; r < cfg.replicates; ++r) {
    FitConfig fit;
    fit.grid = cfg.grid;
    fit.smoother.particles = cfg.particles;
    fit.smoother.workers = cfg.workers;
    fit.smoother.seed = replicate_seed(cfg.seed, kBic, static_cast<std::uint64_t>(r));
    tracks.push_back(
        BicTrack::from_fit("ou#" + std::to_string(r), model->dim_theta(), online_gradient_ascent(model, ys, cfg.theta0, fit)));
  }
  const auto diff = bic_difference(tracks[0], tracks[1]);
  int outside = 0;
  double worst = 0.0;
  for (int k = 0; k < cfg.n; ++k) {
    std::vector<double> lk;
    for (const auto& t : tracks) lk.push_back(t.loglik[k]);
    const double band = 2.0 * cfg.band_sigmas * std::sqrt(2.0) * stddev(lk) * cfg.tolerance_scale;
    if (std::abs(diff[k]) > band) ++outside;
    if (band > 0.0) worst = std::max(worst, std::abs(diff[k]) / band);
  }

  // penalty: identical likelihoods, different dimensions
  BicTrack a{"a", 3, {}, {}}, b{"b", 5, {}, {}};
  for (int k = 0; k < cfg.n; ++k) {
    a.push(-0.7, Vector::Zero(3));
    b.push(-0.7, Vector::Zero(5));
  }
  const auto pen = bic_difference(a, b);
  double pen_err = 0.0;
  for (int k = 0; k < cfg.n; ++k) {
    const double expect = (a.dim - b.dim) * std::log(static_cast<double>(k + 1));
    pen_err = std::max(pen_err, std::abs(pen[k] - expect) / std::max(1.0, std::abs(expect)));
  }
  const double hand = bic(-10.0, 3, 100) - (20.0 + 3.0 * std::log(100.0));

  res.passed = outside == 0 && pen_err <= 1e-12 && hand == 0.0 && cfg.tolerance_scale > 0.0;
  res.metrics = {{"points_outside_band", static_cast<double>(outside)},
                 {"max_band_fraction", worst},
                 {"penalty_relative_error", pen_err},
                 {"final_difference", diff.back()}};
  res.summary = "null difference outside band at " + std::to_string(outside) + "/" + std::to_string(cfg.n) +
                " points (max " + fmt(worst, 3) + " of band), penalty error " + fmt(pen_err, 3);
  res.seconds = seconds_since(t0);
  return res;
}

CheckResult check_adam_and_gradients(const UnitSuiteConfig& cfg) {
  const auto t0 = Clock::now();
  CheckResult res;
  res.name = "ADAM and score increments";

  // two ADAM steps on c = (0.3, -2), (-0.7, 1) with the default constants;
  // expected values worked out by hand from the update formulas
  AdamState st = make_adam(2);
  const Vector s1 = adam_update(st, (Vector(2) << 0.3, -2.0).finished());
  const Vector s2 = adam_update(st, (Vector(2) << -0.7, 1.0).finished());
  // step 1: m_hat = c, v_hat = c^2, step = -alpha c / (|c| + eps)
  const Vector e1 = (Vector(2) << -0.001 * 0.3 / (0.3 + 1e-8), 0.001 * 2.0 / (2.0 + 1e-8)).finished();
  // step 2: m = (0.027 - 0.07, -0.18 + 0.1), v = (8.991e-5 + 4.9e-4, 3.996e-3 + 1e-3)
  const Vector e2 = (Vector(2) << -0.001 * (-0.043 / 0.19) / (std::sqrt(5.7991e-4 / 0.001999) + 1e-8),
                     -0.001 * (-0.08 / 0.19) / (std::sqrt(4.996e-3 / 0.001999) + 1e-8))
                        .finished();
  const double adam_err = std::max((s1 - e1).cwiseAbs().maxCoeff(), (s2 - e2).cwiseAbs().maxCoeff());

  ModelPtr model = make_model("ou");
  Rng rng = make_stream(cfg.seed, {kUnits, 0});
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double fd_err = 0.0, ad_err = 0.0;
  GradSpec fd, ad;
  ad.mode = GradSpec::Mode::analytic;
  fd.rel_step = 1e-5;
  for (int c = 0; c < cfg.cases; ++c) {
    const Vector theta = (Vector(3) << 0.2 + 1.5 * u(rng), 2.0 * u(rng) - 1.0, 0.3 + 0.7 * u(rng)).finished();
    const Vector x = Vector::Constant(1, 2.0 * u(rng) - 1.0);
    AugmentedTransition aug = continuous_sample(*model, theta, x, 1.0, 10, rng);
    const auto oracle = ou_bridge_logdensity_gradient(theta, x(0), aug.endpoint(0), 1.0, aug.noise.increments);
    StepContext ctx;  // no observation: transition part only
    const Vector g_fd = score_increment(model, theta, ctx, x, aug, fd);
    const Vector g_ad = score_increment(model, theta, ctx, x, aug, ad);
    const double scale = std::max(1.0, oracle.gradient.cwiseAbs().maxCoeff());
    fd_err = std::max(fd_err, (g_fd - oracle.gradient).cwiseAbs().maxCoeff() / scale);
    ad_err = std::max(ad_err, (g_ad - oracle.gradient).cwiseAbs().maxCoeff() / scale);
  }
  const double fd_vs_ad = fd_err + ad_err;
  res.passed = adam_err <= cfg.adam_tolerance * cfg.tolerance_scale &&
               fd_err <= cfg.gradient_tolerance * cfg.tolerance_scale &&
               ad_err <= cfg.gradient_tolerance * cfg.tolerance_scale;
  res.metrics = {{"adam_abs_error", adam_err},
                 {"fd_relative_error", fd_err},
                 {"analytic_relative_error", ad_err},
                 {"fd_vs_analytic_bound", fd_vs_ad}};
  res.summary = "ADAM error " + fmt(adam_err, 3) + ", gradient relative error fd " + fmt(fd_err, 3) +
                " analytic " + fmt(ad_err, 3);
  res.seconds = seconds_since(t0);
  return res;
}

}  // namespace pathsmooth
