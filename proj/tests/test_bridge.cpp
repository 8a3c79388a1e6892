#include <doctest.h>

#include "pathsmooth/bridge.hpp"
#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"
#include "pathsmooth/stats.hpp"

using namespace pathsmooth;

namespace {

const Vector kTheta = (Vector(3) << 0.4, 0.0, 0.5).finished();

}  // namespace

TEST_CASE("forward map pins both ends exactly") {
  auto m = make_model("ou");
  Rng rng = make_stream(1, {2});
  for (int r = 0; r < 100; ++r) {
    const Vector x = Vector::Constant(1, 0.1 * r - 5.0), xp = Vector::Constant(1, 0.37 * r);
    const NoisePath z = sample_noise(1, 1.3, 7, rng);
    const PathSegment p = bridge_forward_map(*m, kTheta, z, x, xp);
    CHECK(p.states.rows() == 8);
    CHECK(p.states(0, 0) == x(0));
    CHECK(p.states(7, 0) == xp(0));
  }
}

TEST_CASE("noise path keeps grid - 1 increments") {
  Rng rng = make_stream(1, {3});
  const NoisePath z = sample_noise(1, 2.0, 10, rng);
  CHECK(z.increments.rows() == 9);
  CHECK(z.dt() == doctest::Approx(0.2));
  auto m = make_model("ou");
  NoisePath bad = z;
  bad.grid = 1;
  CHECK_THROWS_AS(log_pathspace_density(*m, kTheta, Vector::Zero(1), Vector::Zero(1), bad), ConfigError);
}

TEST_CASE("inverse of forward is the identity") {
  Rng rng = make_stream(1, {4});
  for (const auto& name : {"ou", "periodic", "m3"}) {
    auto m = make_model(name);
    Vector th = name == std::string("ou")         ? kTheta
                : name == std::string("periodic") ? (Vector(2) << 0.7, 0.9).finished()
                                                  : (Vector(5) << 0.1, -0.1, 0.1, 0.05, 0.3).finished();
    const Vector x = Vector::Constant(1, 1.0), xp = Vector::Constant(1, 1.2);
    const NoisePath z = sample_noise(1, 1.0, 25, rng);
    const NoisePath back = bridge_inverse_map(*m, th, bridge_forward_map(*m, th, z, x, xp), x, xp);
    CHECK((back.increments - z.increments).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("guided bridge midpoint matches the conditioned O-U law") {
  // x = 0 -> x' = 0.3 over T = 1, midpoint moments up to O(dt)
  auto m = make_model("ou");
  const Vector x = Vector::Zero(1), xp = Vector::Constant(1, 0.3);
  Rng rng = make_stream(5, {1});
  std::vector<double> mids;
  for (int r = 0; r < 20000; ++r) {
    const PathSegment p = bridge_forward_map(*m, kTheta, sample_noise(1, 1.0, 10, rng), x, xp);
    mids.push_back(p.states(5, 0));
  }
  const auto exact = ou_bridge_moments(kTheta, 0.0, 0.3, 0.5, 1.0);
  CHECK(std::abs(mean(mids) - exact.mean) < 3.0 * standard_error(mids) + 0.02);
  CHECK(std::pow(stddev(mids), 2) == doctest::Approx(exact.var).epsilon(0.1));
}

TEST_CASE("pathspace density averages to the transition density") {
  auto m = make_model("ou");
  const Vector x = Vector::Zero(1), xp = Vector::Constant(1, -0.3);
  Rng rng = make_stream(6, {1});
  double s = 0.0, s2 = 0.0;
  const int R = 20000, M = 20;
  for (int r = 0; r < R; ++r) {
    const double w = std::exp(log_pathspace_density(*m, kTheta, x, xp, sample_noise(1, 1.0, M, rng)));
    s += w;
    s2 += w * w;
  }
  const double mc = s / R, se = std::sqrt((s2 / R - mc * mc) / R);
  // unbiased for the Euler transition on the same grid
  const auto lg = ou_linear_gaussian(1.0, 1.0, 0.0, M)(kTheta);
  const double v = lg.Q(0, 0);
  const double euler = std::exp(-0.5 * 0.09 / v) / std::sqrt(2.0 * std::numbers::pi * v);
  CHECK(std::abs(mc - euler) < 4.0 * se);
  CHECK(std::abs(mc - std::exp(ou_exact_transition(kTheta, 0.0, -0.3, 1.0))) < 0.02);
}

TEST_CASE("girsanov scheme: log phi identity and finite densities") {
  auto m = make_model("ou");
  const Vector x = Vector::Zero(1), xp = Vector::Constant(1, 0.2);
  Rng rng = make_stream(7, {1});
  const NoisePath z = sample_noise(1, 1.0, 30, rng);
  const double lg = log_pathspace_density(*m, kTheta, x, xp, z, DensityScheme::girsanov);
  const PathSegment p = bridge_forward_map(*m, kTheta, z, x, xp);
  // constant sigma: the determinant ratio is 1
  const double s2 = 0.25;
  const double lnorm = -0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * 0.04 / s2;
  CHECK(lg == doctest::Approx(log_phi(*m, kTheta, p, x, xp) + lnorm));
}

TEST_CASE("degenerate diffusion is reported") {
  auto m = make_model("m1");
  const Vector th = (Vector(3) << 0.0, 0.0, 0.3).finished();
  Rng rng = make_stream(8, {1});
  CHECK_THROWS_AS(log_pathspace_density(*m, th, Vector::Constant(1, -1.0), Vector::Constant(1, 1.0),
                                        sample_noise(1, 1.0, 5, rng)),
                  DiffusionDegeneracyError);
}

TEST_CASE("AD and double evaluations agree") {
  auto m = make_model("periodic");
  const Vector th = (Vector(2) << 0.7, 0.9).finished();
  Rng rng = make_stream(9, {1});
  const NoisePath z = sample_noise(1, 1.0, 12, rng);
  const Vector x = Vector::Constant(1, 0.2), xp = Vector::Constant(1, -0.4);
  const double v = bridge_logdensity<double>(*m, ParamVector<double>(th), x, xp, z, DensityScheme::euler_ratio);
  const Dual d = bridge_logdensity<Dual>(*m, lift_params<Dual>(th), x, xp, z, DensityScheme::euler_ratio);
  CHECK(d.value() == doctest::Approx(v).epsilon(1e-13));
  for (int i = 0; i < 2; ++i) {
    Vector tp = th, tm = th;
    tp(i) += 1e-6;
    tm(i) -= 1e-6;
    const double fd = (bridge_logdensity<double>(*m, ParamVector<double>(tp), x, xp, z, DensityScheme::euler_ratio) -
                       bridge_logdensity<double>(*m, ParamVector<double>(tm), x, xp, z, DensityScheme::euler_ratio)) /
                      2e-6;
    CHECK(d.derivatives()(i) == doctest::Approx(fd).epsilon(1e-6));
  }
}
