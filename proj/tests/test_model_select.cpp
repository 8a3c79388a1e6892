#include <doctest.h>

#include "pathsmooth/model_select.hpp"

#include <cmath>

using namespace pathsmooth;

TEST_CASE("BIC values") {
  CHECK(bic(0.0, 2, std::exp(2.0)) == doctest::Approx(4.0));
  CHECK(bic(-10.0, 3, 100.0) == doctest::Approx(20.0 + 3.0 * std::log(100.0)));
}

TEST_CASE("BIC tracks and differences") {
  BicTrack a, b;
  a.dim = 3;
  b.dim = 5;
  for (int k = 0; k < 4; ++k) {
    a.push(-1.0, Vector::Zero(3));
    b.push(-1.0, Vector::Zero(5));
  }
  CHECK(a.current_loglik() == doctest::Approx(-4.0));
  const auto d = bic_difference(a, b);
  REQUIRE(d.size() == 4);
  for (std::size_t k = 0; k < d.size(); ++k) CHECK(d[k] == doctest::Approx(-2.0 * std::log(k + 1.0)));
  b.push(-1.0, Vector::Zero(5));
  CHECK_THROWS_AS(bic_difference(a, b), ConfigError);
}
