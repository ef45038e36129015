#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relpick/dataspec.hpp"
#include "relpick/simgraph.hpp"
#include "relpick/utility.hpp"

namespace relpick {

/// How the next example is chosen at each greedy step.
enum class GainRule {
  surrogate,  // u(cn[x] + C(x)) - u(cn[x]), the candidate's own gain
  exact,      // full objective marginal, summed over the candidate's neighbors
  lazy,       // exact marginal with lazily refreshed upper bounds
};

std::string_view to_string(GainRule rule);
GainRule parse_gain_rule(std::string_view name);

struct SelectionConfig {
  std::size_t budget = 1;
  double tau = 0.95;
  Utility utility = Utility::tanh();
  GainRule rule = GainRule::surrogate;
  bool balanced = false;
  std::uint64_t seed = 0;
};

/// Running reduced-neighborhood-confidence accumulator for one greedy run.
///
/// cn[v] = sum over selected x of w(v, x) * C(x), accumulated in the order
/// of selection and, within a step, neighbor index order.
class SelectionState {
 public:
  explicit SelectionState(std::size_t m) : cn_(m, 0.0), selected_(m, 0) {}

  std::size_t size() const noexcept { return cn_.size(); }
  bool contains(std::size_t i) const noexcept { return selected_[i] != 0; }
  std::span<const std::size_t> order() const noexcept { return order_; }
  std::span<const double> cn() const noexcept { return cn_; }

  /// Adds x and updates cn over its neighborhood. Returns the realized
  /// objective increase sum_v u(cn'[v]) - u(cn[v]).
  double add(const NeighborSource& g, const ConfidenceVector& c, std::size_t x, const Utility& u,
             std::vector<Neighbor>& scratch);

  /// Same, with x's neighbor list already in hand.
  double add(std::span<const Neighbor> neighbors, const ConfidenceVector& c, std::size_t x, const Utility& u);

 private:
  std::vector<double> cn_;
  std::vector<std::uint8_t> selected_;
  std::vector<std::size_t> order_;
};

struct SelectionResult {
  std::vector<std::size_t> order;
  std::vector<double> gains;            // value of the selection criterion at each pick
  std::vector<double> objective_trace;  // objective after each pick
  std::vector<double> step_seconds;
  SelectionConfig config;
  std::size_t m = 0;
  std::vector<std::string> warnings;
};

/// sum_i u(cn(i; S)) evaluated from scratch. Throws on duplicate or
/// out-of-range indices.
double objective(const NeighborSource& g, const ConfidenceVector& c, std::span<const std::size_t> subset,
                 const Utility& u);

/// cn(i; S) for every i, from scratch.
std::vector<double> neighborhood_confidence(const NeighborSource& g, const ConfidenceVector& c,
                                            std::span<const std::size_t> subset);

double surrogate_gain(const SelectionState& state, const ConfidenceVector& c, std::size_t x, const Utility& u);

double exact_gain(const NeighborSource& g, const ConfidenceVector& c, const SelectionState& state, std::size_t x,
                  const Utility& u);
double exact_gain(const NeighborSource& g, const ConfidenceVector& c, const SelectionState& state, std::size_t x,
                  const Utility& u, std::vector<Neighbor>& scratch);

/// Greedy selection of `cfg.budget` examples. With `cfg.balanced`, classes
/// from `labels` take turns; exhausted classes are skipped. Ties on the
/// criterion go to the lowest index.
SelectionResult select(const NeighborSource& g, const ConfidenceVector& c, const LabelVector* labels,
                       const SelectionConfig& cfg);

struct SubsetReport {
  std::size_t m = 0;
  std::size_t selected = 0;
  double objective = 0;
  double cn_min = 0;
  double cn_mean = 0;
  double cn_median = 0;
  double cn_max = 0;
  double coverage = 0;  // fraction of examples with cn > 0
  std::optional<double> noise_ratio;
};

SubsetReport evaluate_subset(const NeighborSource& g, const ConfidenceVector& c, std::span<const std::size_t> subset,
                             const Utility& u, const NoiseFlagVector* noise_flags = nullptr);

/// Report schema version written to every JSON document.
inline constexpr int kSchemaVersion = 1;

/// Serializes a result. With `mask_timings`, timing values are written as 0
/// so that reruns compare byte-for-byte.
std::string to_json(const SelectionResult& r, bool mask_timings = false);
std::string to_json(const SubsetReport& r);

}  // namespace relpick
