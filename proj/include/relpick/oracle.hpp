#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relpick/dataspec.hpp"
#include "relpick/simgraph.hpp"
#include "relpick/utility.hpp"

// Brute-force references. Nothing here calls into the pruner: objectives are
// re-derived from their definitions so the two can be checked against each
// other.
namespace relpick::oracle {

/// Largest number of size-s subsets brute_force_optimum will enumerate.
inline constexpr std::uint64_t kMaxCombinations = 1'000'000;

struct Optimum {
  std::vector<std::size_t> subset;  // ascending
  double objective = 0;
  std::uint64_t evaluated = 0;
};

/// Number of size-s subsets of m items, saturating at UINT64_MAX.
std::uint64_t combinations(std::size_t m, std::size_t s);

/// Exhaustive maximum of the objective over all size-s subsets. Ties go to
/// the lexicographically smallest subset. Throws a size-guard error when
/// more than kMaxCombinations subsets would be visited.
Optimum brute_force_optimum(const NeighborGraph& g, const ConfidenceVector& c, std::size_t s, const UtilitySpec& u);

/// Objective straight from raw embeddings: pairwise cosine, threshold,
/// weighted confidence sum and utility, with no graph or accumulator.
double naive_objective(const EmbeddingMatrix& e, const ConfidenceVector& c, double tau,
                       std::span<const std::size_t> subset, const UtilitySpec& u);

/// Utility evaluated directly from its description.
double utility_value(const UtilitySpec& u, double z);

struct InstanceParams {
  std::uint64_t seed = 0;
  std::size_t m = 10;
  std::size_t d = 8;
  std::uint32_t classes = 2;
  double cluster_spread = 0.3;
  double noise_fraction = 0.0;
};

struct Instance {
  EmbeddingMatrix embeddings;
  ConfidenceVector confidences;
  LabelVector labels;      // observed (possibly flipped) labels
  NoiseFlagVector noise;   // 1 where the observed label is wrong
};

/// Synthetic clustered data. Example i belongs to class i mod classes; clean
/// examples sit near their class center with confidence in [0.6, 1]; noisy
/// ones scatter 1.5 times as far from the center, carry a flipped label, and
/// have confidence in [0.05, 0.45]. Rows are unit-normalized. Deterministic per seed.
Instance random_instance(const InstanceParams& p);

}  // namespace relpick::oracle
