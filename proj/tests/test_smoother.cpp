#include <doctest.h>

#include "pathsmooth/dataset.hpp"
#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"
#include "pathsmooth/smoother.hpp"
#include "pathsmooth/stats.hpp"

#include <numbers>

using namespace pathsmooth;

namespace {

// AR(1) with Gaussian noise: x' = a x + N(0, q), y = x + N(0, r)
DiscreteModel ar1(double a, double q, double r) {
  DiscreteModel m;
  m.dim_theta = 1;
  m.sample_initial = [](const Vector&, Rng&) { return Vector::Zero(1); };
  m.sample_transition = [=](const Vector&, const Vector& x, Rng& rng) {
    std::normal_distribution<double> nd(a * x(0), std::sqrt(q));
    return Vector::Constant(1, nd(rng));
  };
  m.log_transition = [=](const Vector&, const Vector& x, const Vector& xp) {
    const double e = xp(0) - a * x(0);
    return -0.5 * std::log(2.0 * std::numbers::pi * q) - 0.5 * e * e / q;
  };
  m.log_obs = [=](const Vector&, const Vector& y, const Vector& x) {
    const double e = y(0) - x(0);
    return -0.5 * std::log(2.0 * std::numbers::pi * r) - 0.5 * e * e / r;
  };
  return m;
}

LinearGaussianModel ar1_lg(double a, double q, double r) {
  LinearGaussianModel lg;
  lg.A = Matrix::Constant(1, 1, a);
  lg.Q = Matrix::Constant(1, 1, q);
  lg.H = Matrix::Identity(1, 1);
  lg.R = Matrix::Constant(1, 1, r);
  lg.c = Vector::Zero(1);
  lg.m0 = Vector::Zero(1);
  lg.P0 = Matrix::Zero(1, 1);
  return lg;
}

std::vector<Vector> some_data() {
  std::vector<Vector> ys;
  for (double y : {0.3, 0.1, -0.4, -0.2, 0.5, 0.7, 0.2, -0.1}) ys.push_back(Vector::Constant(1, y));
  return ys;
}

LambdaFunctional lag_product() {
  return LambdaFunctional(1, [](const StepContext&, const Vector& a, const Vector& b, Eigen::Ref<Vector> s) {
    s(0) = a(0) * b(0);
  });
}

}  // namespace

TEST_CASE("resampling: offspring counts are unbiased and systematic is tight") {
  const std::vector<double> w = {0.1, 0.4, 0.05, 0.3, 0.15};
  for (auto scheme : {ResampleScheme::multinomial, ResampleScheme::systematic, ResampleScheme::stratified}) {
    std::vector<double> counts(w.size(), 0.0);
    Rng rng = make_stream(1, {static_cast<std::uint64_t>(scheme)});
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
      const auto idx = resample(w, scheme, rng);
      REQUIRE(idx.size() == w.size());
      std::vector<int> c(w.size(), 0);
      for (int i : idx) ++c[i];
      for (std::size_t i = 0; i < w.size(); ++i) {
        counts[i] += c[i];
        if (scheme == ResampleScheme::systematic) {
          CHECK(std::abs(c[i] - static_cast<double>(w.size()) * w[i]) < 1.0 + 1e-9);
        }
      }
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(counts[i] / reps == doctest::Approx(w.size() * w[i]).epsilon(0.03));
    }
  }
  CHECK(effective_sample_size({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(4.0));
  CHECK(effective_sample_size({1.0, 0.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("forward-only smoother matches Kalman on a linear-Gaussian model") {
  const double a = 0.8, q = 0.3, r = 0.1;
  DiscreteDynamics dyn(ar1(a, q, r));
  const auto ys = some_data();
  const auto lg = ar1_lg(a, q, r);
  const double ll = kalman_filter(lg, ys).loglik;
  const auto sm = rts_smoother(lg, ys);
  double exact = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) exact += sm.mean[k](0) * sm.mean[k + 1](0) + sm.cross[k](0, 0);

  auto fn = lag_product();
  std::vector<double> lls, ss;
  for (int rep = 0; rep < 40; ++rep) {
    SmootherConfig cfg;
    cfg.particles = 200;
    cfg.seed = 100 + rep;
    const auto run = run_smoother(dyn, fn, Vector::Zero(1), ys, 1.0, cfg);
    lls.push_back(run.final_state.loglik);
    ss.push_back(run.final_state.estimate(0));
    CHECK(run.estimates.size() == ys.size());
  }
  CHECK(std::abs(mean(ss) - exact) < 4.0 * standard_error(ss) + 0.01);
  CHECK(std::abs(mean(lls) - ll) < 0.1);
}

TEST_CASE("results do not depend on the worker count") {
  auto m = make_model("ou");
  PathspaceDynamics dyn(m, Construct::continuous, 5);
  auto fn = lag_product();
  const Vector th = (Vector(3) << 0.4, 0.0, 0.5).finished();
  SmootherConfig one, four;
  one.particles = four.particles = 40;
  one.seed = four.seed = 9;
  four.workers = 4;
  const auto a = run_smoother(dyn, fn, th, some_data(), 1.0, one);
  const auto b = run_smoother(dyn, fn, th, some_data(), 1.0, four);
  CHECK(a.final_state.estimate(0) == b.final_state.estimate(0));
  CHECK(a.final_state.loglik == b.final_state.loglik);
}

TEST_CASE("ESS-triggered resampling skips steps with even weights") {
  DiscreteDynamics dyn(ar1(0.8, 0.3, 100.0));
  auto fn = lag_product();
  SmootherConfig cfg;
  cfg.particles = 50;
  cfg.ess_threshold = 0.5;
  FilterState st = init_filter(dyn, fn, Vector::Zero(1), nullptr, cfg);
  const Vector y = Vector::Constant(1, 0.1);
  StepContext ctx;
  ctx.k = 1;
  ctx.y = &y;
  smoother_step(st, dyn, fn, Vector::Zero(1), ctx, cfg);
  CHECK_FALSE(st.resampled);
  cfg.ess_threshold.reset();
  smoother_step(st, dyn, fn, Vector::Zero(1), ctx, cfg);
  CHECK(st.resampled);
}

TEST_CASE("non-finite densities name the pair; vanished weights collapse") {
  DiscreteModel bad = ar1(0.8, 0.3, 0.1);
  bad.log_transition = [](const Vector&, const Vector&, const Vector&) { return std::nan(""); };
  DiscreteDynamics dyn(bad);
  auto fn = lag_product();
  SmootherConfig cfg;
  cfg.particles = 5;
  std::vector<Vector> ys = {Vector::Constant(1, 0.0)};
  try {
    run_smoother(dyn, fn, Vector::Zero(1), ys, 1.0, cfg);
    FAIL("expected an error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("pair") != std::string::npos);
  }

  DiscreteModel dead = ar1(0.8, 0.3, 0.1);
  dead.log_obs = [](const Vector&, const Vector&, const Vector&) { return -std::numeric_limits<double>::infinity(); };
  CHECK_THROWS_AS(run_smoother(DiscreteDynamics(dead), fn, Vector::Zero(1), ys, 1.0, cfg), ParticleCollapseError);
}

TEST_CASE("pathspace dynamics reject inconsistent configurations") {
  ModelOptions o;
  o.jump_rate = 0.5;
  CHECK_THROWS_AS(PathspaceDynamics(make_model("ou", o), Construct::continuous, 10), ConfigError);
  CHECK_THROWS_AS(PathspaceDynamics(make_model("heston"), Construct::one, 10), ConfigError);
  CHECK_THROWS_AS(PathspaceDynamics(make_model("ou"), Construct::continuous, 1), ConfigError);
  CHECK_NOTHROW(PathspaceDynamics(make_model("heston"), Construct::continuous, 10));
}

TEST_CASE("Heston: path observations enter the pair weights") {
  auto m = make_model("heston");
  PathspaceDynamics dyn(m, Construct::continuous, 10);
  CHECK(dyn.obs_in_pair());
  const Vector th = (Vector(4) << 0.1, 1.0, 0.2, 0.45).finished();
  Rng rng = make_stream(4, {1});
  const auto data = simulate_dataset(*m, th, 15, 1.0, 100, rng);
  auto fn = lag_product();
  SmootherConfig cfg;
  cfg.particles = 60;
  const auto run = run_smoother(dyn, fn, th, data.ys, 1.0, cfg);
  CHECK(std::isfinite(run.final_state.loglik));
  CHECK(std::isfinite(run.final_state.estimate(0)));
}
