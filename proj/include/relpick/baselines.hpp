#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relpick/dataspec.hpp"

// Comparison selectors that need no training dynamics. Each throws a config
// error when asked for more examples than exist.
namespace relpick::baselines {

/// s indices drawn uniformly without replacement.
std::vector<std::size_t> select_uniform(std::size_t m, std::size_t s, std::uint64_t seed);

/// The s most confident examples, most confident first.
std::vector<std::size_t> select_small_loss(const ConfidenceVector& c, std::size_t s);

/// The s examples with the smallest gap between the top two probabilities.
std::vector<std::size_t> select_margin(const ProbabilityMatrix& p, std::size_t s);

struct KCenterResult {
  std::vector<std::size_t> order;
  std::vector<double> step_seconds;
};

/// Farthest-point-first selection starting at `seed_index`, Euclidean distance
/// on the rows as given. Every step recomputes each point's distance to all
/// current centers, so step t costs O(m t d).
KCenterResult select_kcenter(const EmbeddingMatrix& e, std::size_t s, std::size_t seed_index);

/// Largest distance from any row to its nearest center.
double covering_radius(const EmbeddingMatrix& e, std::span<const std::size_t> centers);

}  // namespace relpick::baselines
