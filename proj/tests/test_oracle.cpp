#include <doctest.h>

#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"

#include <numbers>

using namespace pathsmooth;

TEST_CASE("O-U transition: Brownian limit and symmetry") {
  const Vector th = (Vector(3) << 1e-8, 0.0, 0.7).finished();
  const double bm = -0.5 * std::log(2.0 * std::numbers::pi * 0.49 * 2.0) - 0.25 / (2.0 * 0.49 * 2.0);
  CHECK(ou_exact_transition(th, 0.1, 0.6, 2.0) == doctest::Approx(bm).epsilon(1e-6));
  const Vector zero = (Vector(3) << 0.0, 0.0, 0.7).finished();
  CHECK(ou_exact_transition(zero, 0.1, 0.6, 2.0) == doctest::Approx(bm).epsilon(1e-12));

  const Vector t2 = (Vector(3) << 0.8, 0.0, 0.4).finished();
  CHECK(ou_exact_transition(t2, 0.3, -0.2, 1.5) == doctest::Approx(ou_exact_transition(t2, -0.3, 0.2, 1.5)));
}

TEST_CASE("O-U transition agrees with a fine Euler composition") {
  const Vector th = (Vector(3) << 0.4, 0.2, 0.5).finished();
  const auto lg = ou_linear_gaussian(1.0, 0.1, 0.0, 10000)(th);
  const double mean = lg.A(0, 0) * 0.5 + lg.c(0), var = lg.Q(0, 0);
  for (double xp : {-0.5, 0.1, 0.9}) {
    const double euler = std::exp(-0.5 * (xp - mean) * (xp - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
    CHECK(std::abs(euler - std::exp(ou_exact_transition(th, 0.5, xp, 1.0))) < 1e-3);
  }
}

TEST_CASE("Kalman likelihood equals the dense Gaussian likelihood") {
  const Vector th = (Vector(3) << 0.4, 0.1, 0.5).finished();
  std::vector<Vector> ys;
  for (double y : {0.2, -0.1, 0.35, 0.5, 0.05}) ys.push_back(Vector::Constant(1, y));
  for (int grid : {0, 10}) {
    const auto lg = ou_linear_gaussian(1.0, 0.1, 0.3, grid)(th);
    for (std::size_t n = 1; n <= 5; ++n) {
      const std::vector<Vector> sub(ys.begin(), ys.begin() + static_cast<long>(n));
      CHECK(kalman_filter(lg, sub).loglik == doctest::Approx(dense_gaussian_loglik(lg, sub)).epsilon(1e-11));
    }
  }
}

TEST_CASE("Kalman edge cases") {
  const Vector th = (Vector(3) << 0.4, 0.1, 0.5).finished();
  auto lg = ou_linear_gaussian(1.0, 0.1, 0.3, 0)(th);
  CHECK(kalman_filter(lg, {}).loglik == 0.0);
  // observing x_0 with a flat-free prior: l = log g(y_0 | x_0 = 0.3)
  lg.observe_initial = true;
  const double g = -0.5 * std::log(2.0 * std::numbers::pi * 0.01) - 0.5 * 0.04 / 0.01;
  CHECK(kalman_filter(lg, {Vector::Constant(1, 0.5)}).loglik == doctest::Approx(g));
  lg.R(0, 0) = -1.0;
  CHECK_THROWS_AS(kalman_filter(lg, {Vector::Constant(1, 0.5)}), NumericalError);
}

TEST_CASE("RTS smoother: last state equals the filter, cross covariances sized") {
  const Vector th = (Vector(3) << 0.4, 0.0, 0.5).finished();
  const auto lg = ou_linear_gaussian(1.0, 0.1, 0.0, 10)(th);
  std::vector<Vector> ys;
  for (int k = 0; k < 6; ++k) ys.push_back(Vector::Constant(1, 0.1 * k));
  const auto kf = kalman_filter(lg, ys);
  const auto sm = rts_smoother(lg, ys);
  CHECK(sm.mean.size() == 7);
  CHECK(sm.cross.size() == 6);
  CHECK(sm.mean.back()(0) == doctest::Approx(kf.filtered_mean.back()(0)));
  CHECK(sm.mean[0](0) == doctest::Approx(0.0));
}

TEST_CASE("Kalman score is a gradient of the log-likelihood") {
  const Vector th = (Vector(3) << 0.4, 0.0, 0.5).finished();
  std::vector<Vector> ys;
  for (double y : {0.2, -0.1, 0.35}) ys.push_back(Vector::Constant(1, y));
  const auto fam = ou_linear_gaussian(1.0, 0.1, 0.0, 0);
  const auto res = kalman_loglik_and_score(fam, th, ys);
  Vector tp = th;
  tp(2) += 1e-4;
  const double dl = kalman_filter(fam(tp), ys).loglik - res.loglik;
  CHECK(dl / 1e-4 == doctest::Approx(res.score(2)).epsilon(1e-3));
}

TEST_CASE("hand-derived bridge gradient matches finite differences") {
  const Vector th = (Vector(3) << 0.6, -0.2, 0.7).finished();
  Rng rng = make_stream(1, {1});
  Matrix inc(9, 1);
  std::normal_distribution<double> nd;
  for (int j = 0; j < 9; ++j) inc(j, 0) = nd(rng) * std::sqrt(0.1);
  const auto vg = ou_bridge_logdensity_gradient(th, 0.1, 0.5, 1.0, inc);
  for (int i = 0; i < 3; ++i) {
    Vector tp = th, tm = th;
    tp(i) += 1e-6;
    tm(i) -= 1e-6;
    const double fd = (ou_bridge_logdensity_gradient(tp, 0.1, 0.5, 1.0, inc).value -
                       ou_bridge_logdensity_gradient(tm, 0.1, 0.5, 1.0, inc).value) /
                      2e-6;
    CHECK(vg.gradient(i) == doctest::Approx(fd).epsilon(1e-6));
  }
}
