#include "relpick/pruner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <string>

#include "relpick/error.hpp"

namespace relpick {
namespace {

void check_index(std::size_t x, std::size_t m) {
  if (x >= m) fail_config("index " + std::to_string(x) + " out of range for " + std::to_string(m) + " examples");
}

void check_unselected(const SelectionState& state, std::size_t x) {
  check_index(x, state.size());
  if (state.contains(x)) fail_config("index " + std::to_string(x) + " is already selected");
}

void check_sizes(const NeighborSource& g, const ConfidenceVector& c) {
  if (c.size() != g.size()) {
    fail_data("confidence vector has " + std::to_string(c.size()) + " values but the graph has " +
              std::to_string(g.size()) + " nodes");
  }
}

// Candidate with the larger value wins; equal values go to the lower index.
bool beats(double value, std::size_t index, double best_value, std::size_t best_index) {
  return value > best_value || (value == best_value && index < best_index);
}

struct Pick {
  std::size_t index;
  double criterion;
};

struct HeapEntry {
  double bound;
  std::uint32_t index;
  std::size_t stamp;  // number of picks made when `bound` was computed
};

struct HeapOrder {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    return beats(b.bound, b.index, a.bound, a.index);
  }
};

using LazyHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder>;

// Runs one greedy selection. Candidate pools are either one pool with every
// index or one pool per class; pools are visited round-robin.
class GreedyRun {
 public:
  GreedyRun(const NeighborSource& g, const ConfidenceVector& c, const SelectionConfig& cfg,
            std::vector<std::vector<std::uint32_t>> pools)
      : g_(g), c_(c), cfg_(cfg), state_(g.size()), pools_(std::move(pools)) {
    const std::size_t m = g.size();
    if (cfg_.rule == GainRule::surrogate) {
      surrogate_.resize(m);
      for (std::size_t v = 0; v < m; ++v) surrogate_[v] = surrogate_gain(state_, c_, v, cfg_.utility);
    } else if (cfg_.rule == GainRule::lazy) {
      heaps_.resize(pools_.size());
      for (std::size_t p = 0; p < pools_.size(); ++p) {
        std::vector<HeapEntry> entries;
        entries.reserve(pools_[p].size());
        for (auto v : pools_[p]) entries.push_back({exact_gain(g_, c_, state_, v, cfg_.utility, scratch_), v, 0});
        heaps_[p] = LazyHeap(HeapOrder{}, std::move(entries));
      }
    }
    remaining_.resize(pools_.size());
    for (std::size_t p = 0; p < pools_.size(); ++p) remaining_[p] = pools_[p].size();
  }

  SelectionResult run(std::size_t budget) {
    SelectionResult r;
    r.order.reserve(budget);
    double total = 0;
    std::size_t pool = 0;
    while (r.order.size() < budget) {
      while (remaining_[pool] == 0) pool = (pool + 1) % pools_.size();
      const auto start = std::chrono::steady_clock::now();
      const Pick pick = choose(pool);
      const auto nbrs = g_.neighbors(pick.index, scratch_);
      total += state_.add(nbrs, c_, pick.index, cfg_.utility);
      if (cfg_.rule == GainRule::surrogate) {
        for (const auto& [v, w] : nbrs) {
          if (!state_.contains(v)) surrogate_[v] = surrogate_gain(state_, c_, v, cfg_.utility);
        }
      }
      const auto stop = std::chrono::steady_clock::now();
      --remaining_[pool];
      pool = (pool + 1) % pools_.size();
      r.order.push_back(pick.index);
      r.gains.push_back(pick.criterion);
      r.objective_trace.push_back(total);
      r.step_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    }
    return r;
  }

 private:
  Pick choose(std::size_t pool) {
    switch (cfg_.rule) {
      case GainRule::surrogate:
        return scan(pool, [&](std::size_t v) { return surrogate_[v]; });
      case GainRule::exact:
        return scan(pool, [&](std::size_t v) { return exact_gain(g_, c_, state_, v, cfg_.utility, scratch_); });
      case GainRule::lazy:
        return lazy(pool);
    }
    return {};
  }

  template <class Gain>
  Pick scan(std::size_t pool, Gain&& gain) {
    Pick best{0, -1.0};
    bool found = false;
    for (auto v : pools_[pool]) {
      if (state_.contains(v)) continue;
      const double value = gain(v);
      if (!found || beats(value, v, best.criterion, best.index)) {
        best = {v, value};
        found = true;
      }
    }
    return best;
  }

  // CELF: stale bounds never underestimate the current marginal, so the first
  // fresh entry at the top of the heap is the exact-greedy choice. Entries
  // whose bound lies within rounding distance of the winner are refreshed and
  // compared directly, which keeps ties resolved exactly as the full scan does.
  Pick lazy(std::size_t pool) {
    auto& heap = heaps_[pool];
    const std::size_t now = state_.order().size();
    HeapEntry best;
    while (true) {
      HeapEntry top = heap.top();
      heap.pop();
      if (top.stamp == now) {
        best = top;
        break;
      }
      top.bound = exact_gain(g_, c_, state_, top.index, cfg_.utility, scratch_);
      top.stamp = now;
      heap.push(top);
    }
    const double tol = 1e-10 * (1.0 + std::abs(best.bound));
    std::vector<HeapEntry> held;
    while (!heap.empty() && heap.top().bound >= best.bound - tol) {
      HeapEntry e = heap.top();
      heap.pop();
      if (e.stamp != now) {
        e.bound = exact_gain(g_, c_, state_, e.index, cfg_.utility, scratch_);
        e.stamp = now;
      }
      if (beats(e.bound, e.index, best.bound, best.index)) std::swap(e, best);
      held.push_back(e);
    }
    for (const auto& e : held) heap.push(e);
    return {best.index, best.bound};
  }

  const NeighborSource& g_;
  const ConfidenceVector& c_;
  const SelectionConfig& cfg_;
  SelectionState state_;
  std::vector<std::vector<std::uint32_t>> pools_;
  std::vector<std::size_t> remaining_;
  std::vector<double> surrogate_;
  std::vector<LazyHeap> heaps_;
  std::vector<Neighbor> scratch_;
};

}  // namespace

std::string_view to_string(GainRule rule) {
  switch (rule) {
    case GainRule::surrogate:
      return "surrogate";
    case GainRule::exact:
      return "exact";
    case GainRule::lazy:
      return "lazy";
  }
  return "?";
}

GainRule parse_gain_rule(std::string_view name) {
  if (name == "surrogate") return GainRule::surrogate;
  if (name == "exact" || name == "exact-greedy") return GainRule::exact;
  if (name == "lazy" || name == "lazy-exact-greedy") return GainRule::lazy;
  fail_config("unknown rule '" + std::string(name) + "' (expected surrogate, exact or lazy)");
}

// --- SelectionState ----------------------------------------------------------

double SelectionState::add(const NeighborSource& g, const ConfidenceVector& c, std::size_t x, const Utility& u,
                           std::vector<Neighbor>& scratch) {
  check_unselected(*this, x);
  return add(g.neighbors(x, scratch), c, x, u);
}

double SelectionState::add(std::span<const Neighbor> neighbors, const ConfidenceVector& c, std::size_t x,
                           const Utility& u) {
  check_unselected(*this, x);
  const double cx = c[x];
  double delta = 0;
  for (const auto& [v, w] : neighbors) {
    const double before = cn_[v];
    cn_[v] += w * cx;
    delta += u(cn_[v]) - u(before);
  }
  selected_[x] = 1;
  order_.push_back(x);
  return delta;
}

// --- objective and gains -----------------------------------------------------

std::vector<double> neighborhood_confidence(const NeighborSource& g, const ConfidenceVector& c,
                                            std::span<const std::size_t> subset) {
  check_sizes(g, c);
  const std::size_t m = g.size();
  std::vector<std::uint8_t> seen(m, 0);
  std::vector<double> cn(m, 0.0);
  std::vector<Neighbor> scratch;
  for (std::size_t x : subset) {
    check_index(x, m);
    if (seen[x]) fail_config("duplicate index " + std::to_string(x) + " in subset");
    seen[x] = 1;
    for (const auto& [v, w] : g.neighbors(x, scratch)) cn[v] += w * c[x];
  }
  return cn;
}

double objective(const NeighborSource& g, const ConfidenceVector& c, std::span<const std::size_t> subset,
                 const Utility& u) {
  double total = 0;
  for (double z : neighborhood_confidence(g, c, subset)) total += u(z);
  return total;
}

double surrogate_gain(const SelectionState& state, const ConfidenceVector& c, std::size_t x, const Utility& u) {
  check_unselected(state, x);
  const double cn = state.cn()[x];
  return u(cn + c[x]) - u(cn);
}

double exact_gain(const NeighborSource& g, const ConfidenceVector& c, const SelectionState& state, std::size_t x,
                  const Utility& u, std::vector<Neighbor>& scratch) {
  check_unselected(state, x);
  const double cx = c[x];
  const auto cn = state.cn();
  double gain = 0;
  for (const auto& [v, w] : g.neighbors(x, scratch)) gain += u(cn[v] + w * cx) - u(cn[v]);
  return gain;
}

double exact_gain(const NeighborSource& g, const ConfidenceVector& c, const SelectionState& state, std::size_t x,
                  const Utility& u) {
  std::vector<Neighbor> scratch;
  return exact_gain(g, c, state, x, u, scratch);
}

// --- selection ---------------------------------------------------------------

SelectionResult select(const NeighborSource& g, const ConfidenceVector& c, const LabelVector* labels,
                       const SelectionConfig& cfg) {
  check_sizes(g, c);
  const std::size_t m = g.size();
  if (cfg.budget == 0) fail_config("budget must be at least 1");
  if (cfg.tau != g.tau()) {
    fail_config("config tau " + std::to_string(cfg.tau) + " does not match neighbor tau " + std::to_string(g.tau()));
  }
  if (cfg.balanced && labels == nullptr) fail_config("balanced selection requires labels");
  if (labels != nullptr && labels->size() != m) {
    fail_data("label vector has " + std::to_string(labels->size()) + " entries, expected " + std::to_string(m));
  }

  std::vector<std::string> warnings;
  std::size_t budget = cfg.budget;
  if (budget > m) {
    warnings.push_back("budget " + std::to_string(budget) + " exceeds the " + std::to_string(m) +
                       " available examples; selecting all of them");
    budget = m;
  }

  std::vector<std::vector<std::uint32_t>> pools;
  if (cfg.balanced) {
    pools.resize(labels->class_count());
    for (std::size_t i = 0; i < m; ++i) pools[(*labels)[i]].push_back(static_cast<std::uint32_t>(i));
    std::erase_if(pools, [](const auto& p) { return p.empty(); });
  } else {
    pools.emplace_back(m);
    for (std::size_t i = 0; i < m; ++i) pools[0][i] = static_cast<std::uint32_t>(i);
  }

  GreedyRun run(g, c, cfg, std::move(pools));
  SelectionResult r = run.run(budget);
  r.config = cfg;
  r.m = m;
  r.warnings = std::move(warnings);
  return r;
}

SubsetReport evaluate_subset(const NeighborSource& g, const ConfidenceVector& c, std::span<const std::size_t> subset,
                             const Utility& u, const NoiseFlagVector* noise_flags) {
  auto cn = neighborhood_confidence(g, c, subset);
  SubsetReport rep;
  rep.m = cn.size();
  rep.selected = subset.size();
  double sum = 0;
  std::size_t covered = 0;
  for (double z : cn) {
    rep.objective += u(z);
    sum += z;
    covered += z > 0 ? 1 : 0;
  }
  rep.cn_mean = sum / static_cast<double>(cn.size());
  rep.coverage = static_cast<double>(covered) / static_cast<double>(cn.size());
  std::sort(cn.begin(), cn.end());
  rep.cn_min = cn.front();
  rep.cn_max = cn.back();
  const std::size_t mid = cn.size() / 2;
  rep.cn_median = cn.size() % 2 ? cn[mid] : 0.5 * (cn[mid - 1] + cn[mid]);
  if (noise_flags != nullptr) {
    if (noise_flags->size() != rep.m) {
      fail_data("noise flag vector has " + std::to_string(noise_flags->size()) + " entries, expected " +
                std::to_string(rep.m));
    }
    if (!subset.empty()) {
      std::size_t noisy = 0;
      for (std::size_t x : subset) noisy += (*noise_flags)[x] ? 1 : 0;
      rep.noise_ratio = static_cast<double>(noisy) / static_cast<double>(subset.size());
    }
  }
  return rep;
}

}  // namespace relpick
