#include <doctest.h>

#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"
#include "pathsmooth/simulate.hpp"
#include "pathsmooth/spd.hpp"
#include "pathsmooth/stats.hpp"

#include <numbers>

using namespace pathsmooth;

TEST_CASE("catalog builds every model and rejects unknown names") {
  for (const auto& name : builtin_model_names()) {
    auto m = make_model(name);
    CHECK(m->dim_x() == 1);
    CHECK(m->dim_theta() == static_cast<int>(m->info().domains.size()));
  }
  CHECK_THROWS_AS(make_model("cir"), ConfigError);
  CHECK(make_model("m1")->dim_theta() == 3);
  CHECK(make_model("m2")->dim_theta() == 4);
  CHECK(make_model("m3")->dim_theta() == 5);
}

TEST_CASE("parameter checks") {
  auto ou = make_model("ou");
  CHECK_NOTHROW(check_parameters(*ou, (Vector(3) << 0.5, -1.0, 0.4).finished()));
  CHECK_THROWS_AS(check_parameters(*ou, (Vector(2) << 0.5, 0.4).finished()), ConfigError);
  CHECK_THROWS_AS(check_parameters(*ou, (Vector(3) << 0.5, 0.0, -0.4).finished()), ConfigError);

  const ParamDomain circle = ParamDomain::periodic(0.0, 2.0 * std::numbers::pi);
  CHECK(circle.wrap(2.0 * std::numbers::pi + 0.25) == doctest::Approx(0.25));
  CHECK(circle.wrap(-0.25) == doctest::Approx(2.0 * std::numbers::pi - 0.25));

  auto heston = make_model("heston");
  const Vector bad = (Vector(4) << 0.1, 1.0, 0.8, 0.45).finished();
  CHECK_FALSE(heston->admissible(bad));
  const Vector fixed = heston->project(bad);
  CHECK(heston->admissible(fixed));
  CHECK(2.0 * fixed(0) * fixed(1) - fixed(2) * fixed(2) > 0.0);
}

TEST_CASE("SPD factor rejects degenerate covariances") {
  SquareMatrix<double> s(1, 1);
  s(0, 0) = 0.0;
  SpdFactor<double> f;
  CHECK_THROWS_AS(f.compute_from_diffusion(s), DiffusionDegeneracyError);
  s(0, 0) = 0.3;
  f.compute_from_diffusion(s);
  CHECK(f.logdet() == doctest::Approx(std::log(0.09)));

  SquareMatrix<double> c(2, 2);
  c << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(f.compute(c), DiffusionDegeneracyError);
  c << 2.0, 0.5, 0.5, 1.0;
  f.compute(c);
  CHECK(f.logdet() == doctest::Approx(std::log(1.75)));
  const State<double> v = (State<double>(2) << 1.0, -1.0).finished();
  CHECK(f.quad(v) == doctest::Approx(v.dot(Eigen::Matrix2d(c).inverse() * v)));
}

TEST_CASE("jump grid index is the first grid point at or after tau") {
  CHECK(jump_grid_index(0.05, 1.0, 10) == 1);
  CHECK(jump_grid_index(0.1, 1.0, 10) == 1);
  CHECK(jump_grid_index(0.1000001, 1.0, 10) == 2);
  CHECK(jump_grid_index(1e-12, 1.0, 10) == 1);
  CHECK(jump_grid_index(0.999, 1.0, 10) == 10);
}

TEST_CASE("jump record: sorted times inside the interval, overflow cap") {
  ModelOptions o;
  o.jump_rate = 3.0;
  auto m = make_model("ou", o);
  const Vector th = (Vector(3) << 0.3, 0.0, 0.2).finished();
  Rng rng = make_stream(1, {1});
  int total = 0;
  for (int r = 0; r < 2000; ++r) {
    const JumpSet j = simulate_jumps(*m, th, 2.0, rng);
    total += static_cast<int>(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      CHECK(j[i].time > 0.0);
      CHECK(j[i].time < 2.0);
      CHECK(std::abs(j[i].size(0)) <= 0.5);
      if (i > 0) CHECK(j[i].time > j[i - 1].time);
    }
  }
  CHECK(total / 2000.0 == doctest::Approx(6.0).epsilon(0.05));
  SimulationOptions tight;
  tight.max_jumps = 1;
  o.jump_rate = 50.0;
  CHECK_THROWS_AS(simulate_jumps(*make_model("ou", o), th, 1.0, rng, tight), JumpOverflowError);
}

TEST_CASE("O-U Euler endpoints match the exact transition moments") {
  auto m = make_model("ou");
  const Vector th = (Vector(3) << 0.4, 0.3, 0.5).finished();
  Rng rng = make_stream(2, {1});
  std::vector<double> ends;
  for (int r = 0; r < 20000; ++r) {
    ends.push_back(simulate_path(*m, th, Vector::Constant(1, 1.0), 1.0, 200, rng).endpoint()(0));
  }
  const double mu = 0.3 + 0.7 * std::exp(-0.4);
  const double var = 0.25 * (1.0 - std::exp(-0.8)) / 0.8;
  CHECK(std::abs(mean(ends) - mu) < 3.0 * std::sqrt(var / ends.size()));
  CHECK(std::pow(stddev(ends), 2) == doctest::Approx(var).epsilon(0.03));
}

TEST_CASE("square-root models stay finite under full truncation") {
  auto m = make_model("heston");
  const Vector th = (Vector(4) << 2.0, 0.05, 0.44, 0.0).finished();
  Rng rng = make_stream(3, {1});
  for (int r = 0; r < 200; ++r) {
    const PathSegment p = simulate_path(*m, th, Vector::Constant(1, 0.05), 1.0, 20, rng);
    CHECK(p.states.allFinite());
  }
}
