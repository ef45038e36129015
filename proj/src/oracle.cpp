#include "relpick/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "relpick/error.hpp"

namespace relpick::oracle {
namespace {

void check_subset(std::span<const std::size_t> subset, std::size_t m) {
  std::vector<bool> seen(m, false);
  for (std::size_t x : subset) {
    if (x >= m) fail_config("index " + std::to_string(x) + " out of range");
    if (seen[x]) fail_config("duplicate index " + std::to_string(x) + " in subset");
    seen[x] = true;
  }
}

}  // namespace

double utility_value(const UtilitySpec& u, double z) {
  switch (u.kind) {
    case UtilityKind::tanh:
      return std::tanh(z);
    case UtilityKind::identity:
      return z;
    case UtilityKind::piecewise: {
      double z0 = 0, y0 = 0;
      for (const auto& [z1, y1] : u.knots) {
        if (z < z1) return y0 + (y1 - y0) * (z - z0) / (z1 - z0);
        z0 = z1;
        y0 = y1;
      }
      return y0;
    }
  }
  return 0;
}

std::uint64_t combinations(std::size_t m, std::size_t s) {
  if (s > m) return 0;
  s = std::min(s, m - s);
  std::uint64_t result = 1;
  for (std::size_t k = 1; k <= s; ++k) {
    // result * (m - s + k) / k is exact at every step.
    const std::uint64_t num = m - s + k;
    if (result > std::numeric_limits<std::uint64_t>::max() / num) return std::numeric_limits<std::uint64_t>::max();
    result = result * num / k;
  }
  return result;
}

Optimum brute_force_optimum(const NeighborGraph& g, const ConfidenceVector& c, std::size_t s, const UtilitySpec& u) {
  const std::size_t m = g.size();
  if (c.size() != m) fail_data("confidence length does not match graph size");
  if (s > m) fail_config("subset size " + std::to_string(s) + " exceeds " + std::to_string(m) + " examples");
  const auto count = combinations(m, s);
  if (count > kMaxCombinations) {
    fail_size_guard("brute force over C(" + std::to_string(m) + ", " + std::to_string(s) + ") subsets exceeds the limit of " +
                    std::to_string(kMaxCombinations));
  }

  // Dense weight matrix: weight[i * m + j] is the similarity if j is a
  // neighbor of i, else 0.
  std::vector<double> weight(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& nb : g.row(i)) weight[i * m + nb.index] = nb.weight;
  }

  auto evaluate = [&](const std::vector<std::size_t>& subset) {
    double total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double cn = 0;
      for (std::size_t j : subset) cn += weight[i * m + j] * c[j];
      total += utility_value(u, cn);
    }
    return total;
  };

  Optimum best;
  std::vector<std::size_t> subset(s);
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  best.subset = subset;
  best.objective = evaluate(subset);
  best.evaluated = 1;
  if (s == 0 || s == m) return best;
  while (true) {
    // Advance to the next combination in lexicographic order.
    std::size_t k = s;
    while (k > 0 && subset[k - 1] == m - s + k - 1) --k;
    if (k == 0) break;
    ++subset[k - 1];
    for (std::size_t t = k; t < s; ++t) subset[t] = subset[t - 1] + 1;
    const double value = evaluate(subset);
    ++best.evaluated;
    if (value > best.objective) {
      best.objective = value;
      best.subset = subset;
    }
  }
  return best;
}

double naive_objective(const EmbeddingMatrix& e, const ConfidenceVector& c, double tau,
                       std::span<const std::size_t> subset, const UtilitySpec& u) {
  const std::size_t m = e.rows();
  if (c.size() != m) fail_data("confidence length does not match embedding rows");
  check_subset(subset, m);
  double total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto a = e.row(i);
    double cn = 0;
    for (std::size_t j : subset) {
      const auto b = e.row(j);
      double dot = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        dot += double(a[k]) * b[k];
        na += double(a[k]) * a[k];
        nb += double(b[k]) * b[k];
      }
      const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
      if (sim >= tau) cn += sim * c[j];
    }
    total += utility_value(u, cn);
  }
  return total;
}

Instance random_instance(const InstanceParams& p) {
  if (p.m == 0 || p.d == 0 || p.classes == 0) fail_config("random_instance needs m, d, classes >= 1");
  if (p.cluster_spread < 0) fail_config("cluster_spread must be non-negative");
  if (p.noise_fraction < 0 || p.noise_fraction > 1) fail_config("noise_fraction must be in [0, 1]");

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto gaussian = [&](std::vector<double>& v) {
    for (double& x : v) x = normal(rng);
  };
  auto normalize = [](std::vector<double>& v) {
    double sq = 0;
    for (double x : v) sq += x * x;
    const double n = std::sqrt(sq);
    for (double& x : v) x /= n;
  };

  std::vector<std::vector<double>> centers(p.classes, std::vector<double>(p.d));
  for (auto& ctr : centers) {
    do {
      gaussian(ctr);
    } while (std::all_of(ctr.begin(), ctr.end(), [](double x) { return x == 0; }));
    normalize(ctr);
  }

  const auto noisy_count = static_cast<std::size_t>(std::llround(p.noise_fraction * static_cast<double>(p.m)));
  std::vector<std::size_t> perm(p.m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  NoiseFlagVector noise(p.m, 0);
  for (std::size_t k = 0; k < noisy_count; ++k) noise[perm[k]] = 1;

  const double scale = 1.0 / std::sqrt(static_cast<double>(p.d));
  const double noisy_spread = 1.5 * p.cluster_spread;
  std::vector<float> data(p.m * p.d);
  std::vector<float> conf(p.m);
  std::vector<std::uint32_t> labels(p.m);
  std::vector<double> row(p.d), jitter(p.d);
  for (std::size_t i = 0; i < p.m; ++i) {
    const auto y = static_cast<std::uint32_t>(i % p.classes);
    const double spread = noise[i] ? noisy_spread : p.cluster_spread;
    double sq = 0;
    do {
      gaussian(jitter);
      sq = 0;
      for (std::size_t k = 0; k < p.d; ++k) {
        row[k] = centers[y][k] + spread * scale * jitter[k];
        sq += row[k] * row[k];
      }
    } while (sq == 0);
    const double n = std::sqrt(sq);
    for (std::size_t k = 0; k < p.d; ++k) data[i * p.d + k] = static_cast<float>(row[k] / n);
    if (noise[i]) {
      conf[i] = static_cast<float>(0.05 + 0.4 * unit(rng));
      labels[i] = p.classes > 1
                      ? (y + 1 + static_cast<std::uint32_t>(unit(rng) * (p.classes - 1))) % p.classes
                      : y;
      if (labels[i] == y) labels[i] = (y + 1) % p.classes;
    } else {
      conf[i] = static_cast<float>(0.6 + 0.4 * unit(rng));
      labels[i] = y;
    }
  }
  return Instance{EmbeddingMatrix(p.m, p.d, std::move(data), true), ConfidenceVector(std::move(conf)),
                  LabelVector(std::move(labels), p.classes), std::move(noise)};
}

}  // namespace relpick::oracle
