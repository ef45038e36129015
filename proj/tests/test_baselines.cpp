#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "helpers.hpp"
#include "relpick/baselines.hpp"

using namespace relpick;
using namespace relpick::baselines;
using testing::error_kind_of;

namespace {

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

TEST_CASE("uniform") {
  CHECK(sorted(select_uniform(9, 9, 1)) == iota_n(9));
  CHECK(select_uniform(100, 10, 5) == select_uniform(100, 10, 5));
  CHECK(select_uniform(100, 10, 5) != select_uniform(100, 10, 6));
  const auto s = select_uniform(50, 20, 3);
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 20);
  CHECK(error_kind_of([] { select_uniform(3, 4, 0); }) == ErrorKind::config);
}

TEST_CASE("uniform frequency over many seeds") {
  std::size_t zeros = 0;
  const std::size_t trials = 10000;
  for (std::uint64_t seed = 0; seed < trials; ++seed) zeros += select_uniform(2, 1, seed).front() == 0;
  const double freq = double(zeros) / trials;
  CHECK(std::abs(freq - 0.5) <= 0.02);
}

TEST_CASE("small loss") {
  CHECK(select_small_loss(ConfidenceVector({0.1f, 0.9f, 0.5f}), 2) == std::vector<std::size_t>{1, 2});
  CHECK(select_small_loss(ConfidenceVector({0.3f, 0.3f, 0.3f}), 2) == std::vector<std::size_t>{0, 1});
  CHECK(sorted(select_small_loss(ConfidenceVector({0.3f, 0.7f, 0.1f}), 3)) == iota_n(3));
  CHECK(error_kind_of([] { select_small_loss(ConfidenceVector({0.3f}), 2); }) == ErrorKind::config);
}

TEST_CASE("small loss agrees with a stable argsort") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> coarse(0, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> v(30);
    for (auto& x : v) x = coarse(rng) / 5.0f;
    auto idx = iota_n(30);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] > v[b]; });
    idx.resize(12);
    CHECK(select_small_loss(ConfidenceVector(v), 12) == idx);
  }
}

TEST_CASE("margin") {
  CHECK(select_margin(ProbabilityMatrix(2, 2, {0.5f, 0.5f, 0.9f, 0.1f}), 1) == std::vector<std::size_t>{0});
  const ProbabilityMatrix same(4, 2, {0.7f, 0.3f, 0.7f, 0.3f, 0.7f, 0.3f, 0.7f, 0.3f});
  CHECK(select_margin(same, 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(sorted(select_margin(same, 4)) == iota_n(4));
  CHECK(error_kind_of([] { select_margin(ProbabilityMatrix(2, 1, {1, 1}), 1); }) == ErrorKind::config);
}

TEST_CASE("kcenter examples") {
  const auto e = testing::rows_of({{1, 0}, {0, 1}, {1, 0}});
  CHECK(select_kcenter(e, 2, 0).order == std::vector<std::size_t>{0, 1});
  CHECK(select_kcenter(e, 1, 2).order == std::vector<std::size_t>{2});
  const auto dup = testing::rows_of({{0.5f, 0.5f}, {0.5f, 0.5f}, {0.5f, 0.5f}, {0.5f, 0.5f}});
  CHECK(select_kcenter(dup, 2, 2).order == std::vector<std::size_t>{2, 0});
  CHECK(select_kcenter(dup, 4, 1).step_seconds.size() == 4);
  CHECK(error_kind_of([&] { select_kcenter(e, 4, 0); }) == ErrorKind::config);
  CHECK(error_kind_of([&] { select_kcenter(e, 1, 3); }) == ErrorKind::config);
}

TEST_CASE("kcenter covering radius never grows") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto e = testing::random_unit_rows(rng, 60, 4);
    const auto r = select_kcenter(e, 25, trial);
    CHECK(std::set<std::size_t>(r.order.begin(), r.order.end()).size() == 25);
    double prev = 1e300;
    for (std::size_t k = 1; k <= 25; ++k) {
      const std::span<const std::size_t> prefix(r.order.data(), k);
      const double radius = covering_radius(e, prefix);
      CHECK(radius <= prev);
      prev = radius;
    }
  }
}

TEST_CASE("selection sizes") {
  std::mt19937_64 rng(4);
  const auto e = testing::random_unit_rows(rng, 20, 3);
  const auto c = testing::random_confidences(rng, 20);
  for (std::size_t s : {1ul, 7ul, 20ul}) {
    CHECK(select_uniform(20, s, 9).size() == s);
    CHECK(select_small_loss(c, s).size() == s);
    CHECK(select_kcenter(e, s, 0).order.size() == s);
  }
}
