#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "relpick/utility.hpp"

using namespace relpick;
using testing::error_kind_of;

TEST_CASE("tanh is zero at the origin, increasing and concave") {
  const auto u = Utility::tanh();
  CHECK(u(0.0) == 0.0);
  const double h = 1e-3;
  for (double z = h; z < 20; z += 0.01) {
    const double d1 = (u(z + h) - u(z - h)) / (2 * h);
    const double d2 = (u(z + h) - 2 * u(z) + u(z - h)) / (h * h);
    CHECK(d1 >= 0);
    CHECK(d2 <= 1e-9);
    if (z < 5) CHECK(d1 > 0);
  }
  CHECK(check_utility_contract(u, 50).empty());
}

TEST_CASE("identity") {
  const auto u = Utility::identity();
  CHECK(u(0.0) == 0.0);
  CHECK(u(1.25) == 1.25);
  CHECK(check_utility_contract(u, 10).empty());
}

TEST_CASE("piecewise interpolates and flattens") {
  const auto u = Utility::piecewise({{1.0, 1.0}, {3.0, 2.0}});
  CHECK(u(0.0) == 0.0);
  CHECK(u(0.5) == doctest::Approx(0.5));
  CHECK(u(1.0) == doctest::Approx(1.0));
  CHECK(u(2.0) == doctest::Approx(1.5));
  CHECK(u(3.0) == doctest::Approx(2.0));
  CHECK(u(100.0) == doctest::Approx(2.0));
  CHECK(check_utility_contract(u, 10).empty());
}

TEST_CASE("piecewise validation") {
  using K = std::vector<std::pair<double, double>>;
  CHECK(error_kind_of([] { Utility::piecewise(K{}); }) == ErrorKind::config);
  CHECK(error_kind_of([] { Utility::piecewise(K{{1, 1}, {2, 3}}); }) == ErrorKind::config);  // convex
  CHECK(error_kind_of([] { Utility::piecewise(K{{1, 1}, {2, 0.5}}); }) == ErrorKind::config);  // decreasing
  CHECK(error_kind_of([] { Utility::piecewise(K{{1, 1}, {1, 1.5}}); }) == ErrorKind::config);  // repeated z
  CHECK(error_kind_of([] { Utility::piecewise(K{{-1, 0}}); }) == ErrorKind::config);
  CHECK(error_kind_of([] { Utility::piecewise(K{{1, NAN}}); }) == ErrorKind::config);
  CHECK_NOTHROW(Utility::piecewise(K{{1, 1}, {2, 1}}));
}

TEST_CASE("names") {
  CHECK(parse_utility_kind("tanh") == UtilityKind::tanh);
  CHECK(parse_utility_kind("identity") == UtilityKind::identity);
  CHECK(parse_utility_kind("piecewise") == UtilityKind::piecewise);
  CHECK(to_string(UtilityKind::piecewise) == "piecewise");
  CHECK(error_kind_of([] { parse_utility_kind("relu"); }) == ErrorKind::config);
}
