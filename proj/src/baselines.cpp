#include "relpick/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "relpick/error.hpp"

namespace relpick::baselines {
namespace {

void check_budget(std::size_t m, std::size_t s) {
  if (s > m) fail_config("requested " + std::to_string(s) + " examples but only " + std::to_string(m) + " exist");
}

// Indices ordered by key; equal keys keep index order.
template <class Key>
std::vector<std::size_t> top_by(std::size_t m, std::size_t s, Key&& key) {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  idx.resize(s);
  return idx;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
  double sum = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = double(a[k]) - b[k];
    sum += diff * diff;
  }
  return sum;
}

}  // namespace

std::vector<std::size_t> select_uniform(std::size_t m, std::size_t s, std::uint64_t seed) {
  check_budget(m, s);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = 0; k < s; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, m - 1);
    std::swap(idx[k], idx[pick(rng)]);
  }
  idx.resize(s);
  return idx;
}

std::vector<std::size_t> select_small_loss(const ConfidenceVector& c, std::size_t s) {
  check_budget(c.size(), s);
  return top_by(c.size(), s, [&](std::size_t i) { return -c[i]; });
}

std::vector<std::size_t> select_margin(const ProbabilityMatrix& p, std::size_t s) {
  check_budget(p.rows(), s);
  if (p.cols() < 2) fail_config("margin selection needs at least two classes");
  const auto margins = confidence_from_probs(p, ConfidenceMetric::diffprob);
  return top_by(p.rows(), s, [&](std::size_t i) { return margins[i]; });
}

KCenterResult select_kcenter(const EmbeddingMatrix& e, std::size_t s, std::size_t seed_index) {
  const std::size_t m = e.rows();
  check_budget(m, s);
  if (seed_index >= m) fail_config("seed index " + std::to_string(seed_index) + " out of range");
  KCenterResult r;
  if (s == 0) return r;
  std::vector<std::uint8_t> chosen(m, 0);
  auto t0 = std::chrono::steady_clock::now();
  r.order.push_back(seed_index);
  chosen[seed_index] = 1;
  r.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  while (r.order.size() < s) {
    t0 = std::chrono::steady_clock::now();
    std::size_t best = m;
    double best_dist = -1;
    for (std::size_t i = 0; i < m; ++i) {
      if (chosen[i]) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t ctr : r.order) nearest = std::min(nearest, squared_distance(e.row(i), e.row(ctr)));
      if (nearest > best_dist) {
        best_dist = nearest;
        best = i;
      }
    }
    r.order.push_back(best);
    chosen[best] = 1;
    r.step_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return r;
}

double covering_radius(const EmbeddingMatrix& e, std::span<const std::size_t> centers) {
  if (centers.empty()) return std::numeric_limits<double>::infinity();
  double radius = 0;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t ctr : centers) nearest = std::min(nearest, squared_distance(e.row(i), e.row(ctr)));
    radius = std::max(radius, nearest);
  }
  return std::sqrt(radius);
}

}  // namespace relpick::baselines
