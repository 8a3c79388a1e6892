#include <doctest.h>

#include "pathsmooth/augment.hpp"
#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"

using namespace pathsmooth;

namespace {

ModelPtr jump_ou(double rate = 0.5) {
  ModelOptions o;
  o.jump_rate = rate;
  o.jump_halfwidth = 0.5;
  return make_model("ou", o);
}

const Vector kTheta = (Vector(3) << 0.3, 0.0, 0.2).finished();

}  // namespace

TEST_CASE("segment grid") {
  CHECK(segment_grid(10, 0.5, 1.0) == 5);
  CHECK(segment_grid(10, 0.01, 1.0) == 2);
  CHECK(segment_grid(50, 0.33, 1.0) == 17);
}

TEST_CASE("jump measure density against a unit-rate reference") {
  auto m = jump_ou();
  JumpSet none;
  CHECK(jump_measure_logdensity<double>(*m, ParamVector<double>(kTheta), none, 2.0) == doctest::Approx(2.0 - 1.0));
  JumpSet two = {{0.3, Vector::Constant(1, 0.1)}, {0.8, Vector::Constant(1, -0.4)}};
  const double expect = (1.0 - 0.5) + 2.0 * (std::log(0.5) - std::log(1.0));
  CHECK(jump_measure_logdensity<double>(*m, ParamVector<double>(kTheta), two, 1.0) == doctest::Approx(expect));
  JumpSet outside = {{0.3, Vector::Constant(1, 0.7)}};
  CHECK(jump_measure_logdensity<double>(*m, ParamVector<double>(kTheta), outside, 1.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("construct one: segments chain through the jumps") {
  auto m = jump_ou(3.0);
  Rng rng = make_stream(1, {1});
  for (int r = 0; r < 50; ++r) {
    const Vector x = Vector::Constant(1, 0.2);
    const AugmentedTransition aug = construct_one_sample(*m, kTheta, x, 1.0, 20, rng);
    CHECK_NOTHROW(aug.validate());
    CHECK(aug.segment_ends.size() == aug.jumps.size() + 1);
    CHECK(aug.segment_noise.size() == aug.segment_ends.size());
    CHECK(std::isfinite(construct_one_logdensity(*m, kTheta, x, aug)));
  }
}

TEST_CASE("construct two: rebuilt path carries the snapped jumps") {
  auto m = jump_ou(3.0);
  Rng rng = make_stream(2, {1});
  for (int r = 0; r < 50; ++r) {
    const Vector x = Vector::Constant(1, -0.1);
    AugmentOptions opts;
    opts.keep_path = true;
    const AugmentedTransition aug = construct_two_sample(*m, kTheta, x, 1.0, 20, rng, opts);
    CHECK_NOTHROW(aug.validate());
    const PathSegment p = construct_two_path(*m, kTheta, x, aug);
    CHECK(p.states(20, 0) == aug.endpoint(0));
    CHECK((p.states - aug.path).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::isfinite(construct_two_logdensity(*m, kTheta, x, aug)));
  }
}

TEST_CASE("without jumps the constructs reduce to the continuous density") {
  auto plain = make_model("ou");
  auto m = jump_ou(1e-9);
  Rng rng = make_stream(3, {1});
  const Vector x = Vector::Constant(1, 0.4);
  AugmentedTransition aug = construct_two_sample(*m, kTheta, x, 1.0, 10, rng);
  REQUIRE(aug.jumps.empty());
  const double cont = log_pathspace_density(*plain, kTheta, x, aug.endpoint, aug.noise);
  // the jump factor is exp(T - int lambda) ~ e^1
  CHECK(construct_two_logdensity(*m, kTheta, x, aug) == doctest::Approx(cont + 1.0 - 1e-9));
}

TEST_CASE("per-segment densities average to the O-U transition with jumps frozen") {
  auto m = jump_ou();
  const Vector th = kTheta;
  AugmentedTransition aug;
  aug.kind = Construct::one;
  aug.horizon = 1.0;
  aug.jumps = {{0.4, Vector::Constant(1, 0.3)}};
  const Vector x = Vector::Zero(1);
  const Vector mid = Vector::Constant(1, 0.05), end = Vector::Constant(1, 0.2);
  aug.segment_ends = {mid, end};
  Rng rng = make_stream(4, {1});
  double s = 0.0;
  const int R = 20000;
  for (int r = 0; r < R; ++r) {
    aug.segment_noise = {sample_noise(1, 0.4, 20, rng), sample_noise(1, 0.6, 30, rng)};
    aug.endpoint = end;
    s += std::exp(transition_logdensity<double>(*m, ParamVector<double>(th), x, aug) -
                  jump_measure_logdensity<double>(*m, ParamVector<double>(th), aug.jumps, 1.0));
  }
  const double exact = std::exp(ou_exact_transition(th, 0.0, 0.05, 0.4) + ou_exact_transition(th, 0.35, 0.2, 0.6));
  CHECK(s / R == doctest::Approx(exact).epsilon(0.05));
}

TEST_CASE("validate catches mismatched tags") {
  AugmentedTransition aug;
  aug.kind = Construct::continuous;
  aug.horizon = 1.0;
  aug.jumps = {{0.5, Vector::Zero(1)}};
  CHECK_THROWS_AS(aug.validate(), ConfigError);
  aug.horizon = 0.0;
  CHECK_THROWS_AS(aug.validate(), ConfigError);
}
