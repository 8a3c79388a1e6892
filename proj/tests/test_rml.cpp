#include <doctest.h>

#include "pathsmooth/models.hpp"
#include "pathsmooth/rml.hpp"

using namespace pathsmooth;

TEST_CASE("ADAM first step has magnitude alpha") {
  AdamState st = make_adam(2);
  const Vector d = adam_update(st, (Vector(2) << 3.0, -1e-3).finished());
  CHECK(d(0) == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(d(1) == doctest::Approx(0.001).epsilon(1e-4));
  CHECK(st.n == 1);
}

TEST_CASE("unconstrained coordinates round trip") {
  const std::vector<std::pair<const char*, Vector>> cases = {
      {"ou", (Vector(3) << 0.5, -0.2, 0.4).finished()},
      {"periodic", (Vector(2) << 0.8, 0.9).finished()},
      {"heston", (Vector(4) << 0.1, 1.0, 0.2, 0.45).finished()},
      {"m3", (Vector(5) << 0.1, -0.2, 0.3, -0.4, 0.6).finished()},
  };
  for (const auto& [name, th] : cases) {
    auto m = make_model(name);
    const Vector back = from_unconstrained(*m, to_unconstrained(*m, th));
    CHECK((back - th).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("finite differences and dual numbers agree on nonlinear models") {
  struct Case {
    const char* name;
    Vector theta;
  };
  const std::vector<Case> cases = {
      {"periodic", (Vector(2) << 0.8, 0.9).finished()},
      {"heston", (Vector(4) << 0.1, 1.0, 0.2, 0.45).finished()},
      {"m2", (Vector(4) << 0.5, 0.1, 0.3, 0.6).finished()},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    auto m = make_model(c.name);
    Rng rng = make_stream(3, {1});
    const Vector x0 = m->sample_initial(c.theta, rng);
    const auto aug = sample_transition(Construct::continuous, *m, c.theta, x0, 1.0, 10, rng);
    StepContext ctx;
    ctx.k = 1;
    GradSpec fd, fd_half, ad;
    fd.rel_step = 1e-4;
    fd_half.rel_step = 5e-5;
    ad.mode = GradSpec::Mode::analytic;
    const Vector g1 = score_increment(m, c.theta, ctx, x0, aug, fd);
    const Vector g2 = score_increment(m, c.theta, ctx, x0, aug, fd_half);
    const Vector g3 = score_increment(m, c.theta, ctx, x0, aug, ad);
    // Richardson: central differences are second order
    const Vector rich = (4.0 * g2 - g1) / 3.0;
    for (int i = 0; i < g3.size(); ++i) {
      CHECK(rich(i) == doctest::Approx(g3(i)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("fit edge cases") {
  auto m = make_model("ou");
  FitConfig cfg;
  cfg.smoother.particles = 20;
  const Vector th0 = (Vector(3) << 0.5, 0.0, 0.5).finished();
  const auto empty = online_gradient_ascent(m, {}, th0, cfg);
  CHECK(empty.trajectory.size() == 1);
  CHECK(empty.trajectory[0] == th0);
  CHECK(empty.increments.empty());

  std::vector<Vector> ys(5, Vector::Constant(1, 0.1));
  cfg.divergence_bound = 1e-3;
  CHECK_THROWS_AS(online_gradient_ascent(m, ys, th0, cfg), DivergenceError);
}

TEST_CASE("an inadmissible Heston start is projected with a warning") {
  auto m = make_model("heston");
  FitConfig cfg;
  cfg.smoother.particles = 10;
  const Vector th0 = (Vector(4) << 0.005, 0.1, 0.4, 0.3).finished();
  std::vector<Vector> ys(2, Vector::Constant(1, 0.01));
  const auto fit = online_gradient_ascent(m, ys, th0, cfg);
  REQUIRE_FALSE(fit.warnings.empty());
  CHECK(m->admissible(fit.trajectory[0]));
  CHECK(fit.trajectory.size() == 3);
}
