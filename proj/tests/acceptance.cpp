// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "helpers.hpp"
#include "relpick/oracle.hpp"
#include "relpick/pruner.hpp"

using namespace relpick;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<UtilitySpec>& utility_specs() {
  static const std::vector<UtilitySpec> specs{
      {UtilityKind::tanh, {}},
      {UtilityKind::identity, {}},
      {UtilityKind::piecewise, {{0.4, 0.5}, {1.2, 0.9}, {3.0, 1.2}}},
  };
  return specs;
}

std::vector<std::size_t> random_subset(std::mt19937_64& rng, std::size_t m, std::size_t k) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  perm.resize(k);
  return perm;
}

// Random clustered instance with sizes drawn from the given ranges.
oracle::Instance draw_instance(std::mt19937_64& rng, std::size_t m_lo, std::size_t m_hi, std::size_t d_lo,
                               std::size_t d_hi) {
  oracle::InstanceParams p;
  p.seed = rng();
  p.m = m_lo + rng() % (m_hi - m_lo + 1);
  p.d = d_lo + rng() % (d_hi - d_lo + 1);
  p.classes = static_cast<std::uint32_t>(1 + rng() % 5);
  p.cluster_spread = std::uniform_real_distribution<double>(0.1, 1.5)(rng);
  p.noise_fraction = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
  return oracle::random_instance(p);
}

double draw_tau(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.3, 0.95)(rng); }

Outcome oracle_equivalence() {
  std::mt19937_64 rng(101);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = draw_instance(rng, 1, 60, 1, 16);
    const double tau = draw_tau(rng);
    const auto g = build_graph(inst.embeddings, tau);
    const std::size_t m = g.size();
    const auto subset = random_subset(rng, m, rng() % (m + 1));
    const auto& spec = utility_specs()[trial % 3];
    const double mine = objective(g, inst.confidences, subset, Utility(spec));
    const double ref = oracle::naive_objective(inst.embeddings, inst.confidences, tau, subset, spec);
    worst = std::max(worst, std::abs(mine - ref));
  }
  return {worst <= 1e-7, fmt("max |objective - naive| = %.3g over 500 instances (tol 1e-7)", worst)};
}

Outcome monotone_submodular() {
  std::mt19937_64 rng(202);
  int mono_bad = 0, sub_bad = 0;
  double mono_worst = 0, sub_worst = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto inst = draw_instance(rng, 3, 60, 2, 16);
    const double tau = draw_tau(rng);
    const auto g = build_graph(inst.embeddings, tau);
    const Utility u(utility_specs()[trial % 3]);
    const std::size_t m = g.size();
    const auto perm = random_subset(rng, m, m);
    const std::size_t a = rng() % m;
    const std::size_t b = a + rng() % (m - a);
    const std::vector<std::size_t> A(perm.begin(), perm.begin() + a), B(perm.begin(), perm.begin() + b);
    const double fa = objective(g, inst.confidences, A, u), fb = objective(g, inst.confidences, B, u);
    if (trial % 2 == 0) {
      mono_worst = std::max(mono_worst, fa - fb);
      mono_bad += fa > fb + 1e-9;
    } else {
      const std::size_t x = perm[b + rng() % (m - b)];
      auto Ax = A, Bx = B;
      Ax.push_back(x);
      Bx.push_back(x);
      const double ga = objective(g, inst.confidences, Ax, u) - fa;
      const double gb = objective(g, inst.confidences, Bx, u) - fb;
      sub_worst = std::max(sub_worst, gb - ga);
      sub_bad += gb > ga + 1e-9;
    }
  }
  return {mono_bad == 0 && sub_bad == 0,
          fmt("monotonicity: %d/1000 violations (worst %.3g); submodularity: %d/1000 violations (worst %.3g)",
              mono_bad, mono_worst, sub_bad, sub_worst)};
}

Outcome approximation_bound() {
  std::mt19937_64 rng(303);
  const double bound = 1 - std::exp(-1.0);
  int bad = 0;
  double worst = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = draw_instance(rng, 5, 16, 2, 8);
    const double tau = draw_tau(rng);
    const auto g = build_graph(inst.embeddings, tau);
    const std::size_t s = 1 + rng() % std::min<std::size_t>(5, g.size());
    const auto& spec = utility_specs()[trial % 3];
    SelectionConfig cfg;
    cfg.budget = s;
    cfg.tau = tau;
    cfg.rule = GainRule::exact;
    cfg.utility = Utility(spec);
    const auto r = select(g, inst.confidences, nullptr, cfg);
    const auto opt = oracle::brute_force_optimum(g, inst.confidences, s, spec);
    const double got = oracle::naive_objective(inst.embeddings, inst.confidences, tau, r.order, spec);
    bad += got < 0.63212 * opt.objective - 1e-9;
    if (opt.objective > 0) worst = std::min(worst, got / opt.objective);
  }
  return {bad == 0, fmt("%d/100 instances below 0.63212*OPT; worst greedy/OPT = %.4f (bound %.5f)", bad, worst, bound)};
}

// cn from raw embeddings, sharing nothing with the pruner.
std::vector<double> naive_cn(const EmbeddingMatrix& e, const ConfidenceVector& c, double tau,
                             std::span<const std::size_t> subset) {
  std::vector<double> cn(e.rows(), 0.0);
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t j : subset) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < e.cols(); ++k) {
        dot += double(e.row(i)[k]) * e.row(j)[k];
        na += double(e.row(i)[k]) * e.row(i)[k];
        nb += double(e.row(j)[k]) * e.row(j)[k];
      }
      const double w = dot / std::sqrt(na * nb);
      if (w >= tau) cn[i] += w * c[j];
    }
  }
  return cn;
}

Outcome surrogate_fidelity() {
  std::mt19937_64 rng(404);
  double worst = 0;
  int first_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = draw_instance(rng, 10, 60, 2, 16);
    const double tau = draw_tau(rng);
    const auto g = build_graph(inst.embeddings, tau);
    const auto& c = inst.confidences;
    const Utility u(utility_specs()[trial % 3]);
    SelectionConfig cfg;
    cfg.budget = 1 + rng() % g.size();
    cfg.tau = tau;
    cfg.utility = u;
    const auto r = select(g, c, nullptr, cfg);

    const auto vals = c.values();
    const auto argmax = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    first_bad += r.order.front() != argmax;

    SelectionState state(g.size());
    std::vector<Neighbor> scratch;
    for (std::size_t t = 0; t < r.order.size(); ++t) {
      // The surrogate criterion at each step must be the best available.
      for (std::size_t v = 0; v < g.size(); ++v) {
        if (!state.contains(v) && surrogate_gain(state, c, v, u) > r.gains[t]) first_bad += 1000;
      }
      state.add(g, c, r.order[t], u, scratch);
      const auto fresh = naive_cn(inst.embeddings, c, tau, std::span(r.order.data(), t + 1));
      for (std::size_t v = 0; v < g.size(); ++v) worst = std::max(worst, std::abs(state.cn()[v] - fresh[v]));
    }
  }
  return {worst <= 1e-9 && first_bad == 0,
          fmt("max |cn - recomputed| = %.3g (tol 1e-9); %d first-pick or argmax mismatches over 200 instances", worst,
              first_bad)};
}

Outcome balance() {
  std::mt19937_64 rng(505);
  int bad = 0, runs = 0;
  for (std::uint32_t classes : {2u, 5u, 10u}) {
    for (int trial = 0; trial < 10; ++trial) {
      oracle::InstanceParams p;
      p.seed = rng();
      p.m = 300;
      p.d = 8;
      p.classes = classes;
      p.cluster_spread = 0.8;
      p.noise_fraction = 0.2;
      const auto inst = oracle::random_instance(p);
      const auto g = build_graph(inst.embeddings, 0.7);
      for (auto rule : {GainRule::surrogate, GainRule::exact, GainRule::lazy}) {
        SelectionConfig cfg;
        cfg.budget = 1 + rng() % 200;
        cfg.tau = 0.7;
        cfg.rule = rule;
        cfg.balanced = true;
        const auto r = select(g, inst.confidences, &inst.labels, cfg);
        std::vector<std::size_t> counts(classes, 0);
        for (auto x : r.order) ++counts[inst.labels[x]];
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        bad += (*hi - *lo > 1) || r.order.size() != cfg.budget;
        ++runs;
      }
    }
  }
  // One class with only three members.
  int exhausted_bad = 0;
  for (int trial = 0; trial < 10; ++trial) {
    oracle::InstanceParams p;
    p.seed = rng();
    p.m = 200;
    p.d = 8;
    p.classes = 5;
    const auto inst = oracle::random_instance(p);
    std::vector<std::uint32_t> lab(inst.labels.values().begin(), inst.labels.values().end());
    int kept = 0;
    for (auto& y : lab) {
      if (y == 4 && kept++ >= 3) y = static_cast<std::uint32_t>(rng() % 4);
    }
    const LabelVector labels(lab, 5);
    const auto g = build_graph(inst.embeddings, 0.8);
    SelectionConfig cfg;
    cfg.budget = 120;
    cfg.tau = 0.8;
    cfg.balanced = true;
    const auto r = select(g, inst.confidences, &labels, cfg);
    std::size_t minority = 0;
    for (auto x : r.order) minority += lab[x] == 4;
    exhausted_bad += r.order.size() != 120 || minority != 3;
  }
  return {bad == 0 && exhausted_bad == 0,
          fmt("%d/%d runs with class counts apart by more than 1; %d/10 exhausted-class runs missed the budget", bad,
              runs, exhausted_bad)};
}

Outcome lazy_identity() {
  std::mt19937_64 rng(606);
  int bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = draw_instance(rng, 10, 200, 2, 16);
    const double tau = draw_tau(rng);
    const auto g = build_graph(inst.embeddings, tau);
    SelectionConfig cfg;
    cfg.budget = 1 + rng() % std::min<std::size_t>(50, g.size());
    cfg.tau = tau;
    cfg.utility = Utility(utility_specs()[trial % 3]);
    cfg.rule = GainRule::exact;
    const auto exact = select(g, inst.confidences, nullptr, cfg);
    cfg.rule = GainRule::lazy;
    const auto lazy = select(g, inst.confidences, nullptr, cfg);
    bad += lazy.order != exact.order;
  }
  return {bad == 0, fmt("%d/200 instances where lazy and exact sequences differ", bad)};
}

Outcome noise_direction() {
  const std::vector<double> fractions{0.2, 0.4, 0.6, 0.8};
  std::vector<double> mean(fractions.size(), 0.0);
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    oracle::InstanceParams p;
    p.seed = static_cast<std::uint64_t>(seed);
    p.m = 1000;
    p.d = 16;
    p.classes = 10;
    p.cluster_spread = 1.0;
    p.noise_fraction = 0.2;
    const auto inst = oracle::random_instance(p);
    const auto g = build_graph(inst.embeddings, 0.75);
    SelectionConfig cfg;
    cfg.tau = 0.75;
    cfg.budget = 800;
    // Greedy prefixes are the smaller-budget selections.
    const auto r = select(g, inst.confidences, nullptr, cfg);
    for (std::size_t k = 0; k < fractions.size(); ++k) {
      const auto s = static_cast<std::size_t>(fractions[k] * 1000);
      std::size_t noisy = 0;
      for (std::size_t t = 0; t < s; ++t) noisy += inst.noise[r.order[t]];
      mean[k] += double(noisy) / double(s) / seeds;
    }
  }
  bool ok = mean[0] < 0.2;
  for (std::size_t k = 1; k < mean.size(); ++k) ok = ok && mean[k] >= mean[k - 1] - 0.02;
  return {ok, fmt("mean noise ratio at s/m = 0.2/0.4/0.6/0.8: %.1f%% / %.1f%% / %.1f%% / %.1f%% (20 seeds)",
                  100 * mean[0], 100 * mean[1], 100 * mean[2], 100 * mean[3])};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RELPICK_CLI) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome scaling(const testing::TempDir& dir) {
  const auto csv_path = dir / "bench.csv";
  if (run_cli("bench --sizes 2000,4000,8000,16000 --dim 32 --steps 200 --kcenter-steps 64 --out " +
              csv_path.string() + " 2>/dev/null") != 0) {
    return {false, "bench command failed"};
  }
  std::map<std::string, std::map<std::size_t, std::vector<double>>> steps;
  std::istringstream in(testing::read_file(csv_path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string method, m, t, secs;
    std::getline(ls, method, ',');
    std::getline(ls, m, ',');
    std::getline(ls, t, ',');
    std::getline(ls, secs, ',');
    steps[method][std::stoul(m)].push_back(std::stod(secs));
  }
  const std::size_t window = 16;
  auto head = [&](const std::vector<double>& v) { return median({v.begin(), v.begin() + window}); };
  auto tail = [&](const std::vector<double>& v) { return median({v.end() - window, v.end()}); };

  std::vector<double> xs, ys;
  double worst_flat = 0, least_growth = 1e300;
  for (const auto& [m, v] : steps["prune4rel"]) {
    xs.push_back(std::log(double(m)));
    ys.push_back(std::log(median(v)));
    worst_flat = std::max(worst_flat, tail(v) / head(v));
  }
  for (const auto& [m, v] : steps["kcenter"]) least_growth = std::min(least_growth, tail(v) / head(v));
  if (xs.size() != 4 || steps["kcenter"].size() != 4) return {false, "bench output incomplete"};
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / 4;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / 4;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    sxy += (xs[k] - xbar) * (ys[k] - ybar);
    sxx += (xs[k] - xbar) * (xs[k] - xbar);
  }
  const double slope = sxy / sxx;
  const bool ok = slope >= 0.8 && slope <= 1.4 && worst_flat <= 2.0 && least_growth > 2.0;
  return {ok, fmt("Prune4ReL log-log slope %.3f (want 0.8..1.4), worst last/first step %.2f (want <= 2); "
                  "kCenterGreedy smallest last/first step %.1f (want > 2)",
                  slope, worst_flat, least_growth)};
}

Outcome determinism(const testing::TempDir& dir) {
  const auto pre = (dir / "det").string();
  if (run_cli("generate --m 2000 --seed 9 --out-prefix " + pre) != 0) return {false, "generate failed"};
  const std::string args = "select --embeddings " + pre + ".emb.bin --tau 0.75 --confidences " + pre +
                           ".conf.txt --budget 400 --mask-timings --out ";
  if (run_cli(args + pre + ".1.json") != 0 || run_cli("--threads 4 " + args + pre + ".2.json") != 0)
    return {false, "select failed"};
  const auto a = testing::read_file(pre + ".1.json"), b = testing::read_file(pre + ".2.json");
  return {!a.empty() && a == b, fmt("two select runs: %zu and %zu bytes, %s", a.size(), b.size(),
                                    a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  testing::TempDir dir("acceptance");
  struct Criterion {
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle equivalence", 30, oracle_equivalence},
      {"monotonicity and submodularity", 60, monotone_submodular},
      {"approximation bound", 120, approximation_bound},
      {"surrogate accumulator fidelity", 0, surrogate_fidelity},
      {"class balance", 0, balance},
      {"lazy equals exact", 0, lazy_identity},
      {"noise avoidance", 0, noise_direction},
      {"scaling", 300, [&] { return scaling(dir); }},
      {"determinism", 0, [&] { return determinism(dir); }},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto& c = criteria[k];
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += fmt(" [exceeded %.0f s limit]", c.limit_seconds);
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
