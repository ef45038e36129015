// relpick command-line tool. Talks to the engine exclusively through the C
// interface in relpick/relpick.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "relpick/relpick.h"

namespace {

using json = nlohmann::ordered_json;

constexpr std::size_t kBenchMinSize = 1000;

struct Failure {
  int code;
  std::string message;
};

void check(relpick_status s) {
  if (s != RELPICK_OK) throw Failure{static_cast<int>(s), relpick_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw Failure{RELPICK_ERR_CONFIG, msg}; }

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Embeddings = std::unique_ptr<relpick_embeddings, Deleter<relpick_embeddings, relpick_embeddings_free>>;
using Confidences = std::unique_ptr<relpick_confidences, Deleter<relpick_confidences, relpick_confidences_free>>;
using Probabilities =
    std::unique_ptr<relpick_probabilities, Deleter<relpick_probabilities, relpick_probabilities_free>>;
using Labels = std::unique_ptr<relpick_labels, Deleter<relpick_labels, relpick_labels_free>>;
using NoiseFlags = std::unique_ptr<relpick_noise_flags, Deleter<relpick_noise_flags, relpick_noise_flags_free>>;
using Graph = std::unique_ptr<relpick_graph, Deleter<relpick_graph, relpick_graph_free>>;
using Result = std::unique_ptr<relpick_result, Deleter<relpick_result, relpick_result_free>>;

struct CString {
  char* p = nullptr;
  ~CString() { relpick_string_free(p); }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Failure{RELPICK_ERR_DATA, "cannot open " + path + " for writing"};
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{RELPICK_ERR_DATA, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- shared option groups --------------------------------------------------

struct EmbeddingOpts {
  std::string path;
  std::string format = "binary";
  std::size_t average_groups = 0;

  void add(CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--embeddings", path, "Embedding matrix file");
    if (required) opt->required();
    cmd->add_option("--format", format, "Embedding file format")->check(CLI::IsMember({"binary", "csv"}));
    cmd->add_option("--average-groups", average_groups, "Average each run of K consecutive rows");
  }

  Embeddings load() const {
    relpick_embeddings* e = nullptr;
    check(relpick_embeddings_load(path.c_str(), format == "csv" ? RELPICK_FORMAT_CSV : RELPICK_FORMAT_BINARY,
                                  average_groups, &e));
    return Embeddings(e);
  }
};

struct GraphOpts {
  EmbeddingOpts embeddings;
  std::string graph;
  double tau = 0.95;
  bool tau_given = false;

  void add(CLI::App* cmd) {
    embeddings.add(cmd, false);
    cmd->add_option("--graph", graph, "Cached neighbor graph (instead of --embeddings)");
    cmd->add_option("--tau", tau, "Neighborhood cosine threshold in (0, 1]");
  }

  void validate(CLI::App* cmd) {
    tau_given = cmd->count("--tau") > 0;
    if (tau_given && !(tau > 0 && tau <= 1)) usage_error("--tau must be in (0, 1]");
    if (graph.empty() == embeddings.path.empty()) usage_error("pass exactly one of --graph or --embeddings");
  }

  Graph load() {
    relpick_graph* g = nullptr;
    if (!graph.empty()) {
      check(relpick_graph_load(graph.c_str(), &g));
      Graph out(g);
      if (tau_given && relpick_graph_tau(g) != tau) usage_error("--tau does not match the cached graph's tau");
      tau = relpick_graph_tau(g);
      return out;
    }
    auto e = embeddings.load();
    check(relpick_graph_build(e.get(), tau, &g));
    return Graph(g);
  }
};

struct ConfidenceOpts {
  std::string confidences;
  std::string probs;
  std::string metric = "maxprob";

  void add(CLI::App* cmd) {
    cmd->add_option("--confidences", confidences, "Confidence file (one value per line or binary)");
    cmd->add_option("--probs", probs, "Softmax probability matrix (CSV or binary)");
    cmd->add_option("--metric", metric, "Confidence metric for --probs")->check(CLI::IsMember({"maxprob", "diffprob"}));
  }

  Confidences load() const {
    if (confidences.empty() == probs.empty()) usage_error("pass exactly one of --confidences or --probs");
    relpick_confidences* c = nullptr;
    if (!confidences.empty()) {
      check(relpick_confidences_load(confidences.c_str(), &c));
      return Confidences(c);
    }
    relpick_probabilities* p = nullptr;
    check(relpick_probabilities_load(probs.c_str(), &p));
    Probabilities owned(p);
    check(relpick_confidences_from_probabilities(
        p, metric == "diffprob" ? RELPICK_METRIC_DIFFPROB : RELPICK_METRIC_MAXPROB, &c));
    return Confidences(c);
  }
};

struct UtilityOpts {
  std::string kind = "tanh";
  std::string knots_text;
  std::vector<double> knots;

  void add(CLI::App* cmd) {
    cmd->add_option("--utility", kind, "Utility function")->check(CLI::IsMember({"tanh", "identity", "piecewise"}));
    cmd->add_option("--knots", knots_text, "Piecewise knots as z:y,z:y,...");
  }

  relpick_utility get() {
    relpick_utility u{RELPICK_UTILITY_TANH, nullptr, 0};
    if (kind == "identity") u.kind = RELPICK_UTILITY_IDENTITY;
    if (kind == "piecewise") {
      knots.clear();
      std::stringstream ss(knots_text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) usage_error("bad knot '" + item + "', expected z:y");
        try {
          knots.push_back(std::stod(item.substr(0, colon)));
          knots.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
          usage_error("bad knot '" + item + "'");
        }
      }
      if (knots.empty()) usage_error("--utility piecewise needs --knots");
      u = {RELPICK_UTILITY_PIECEWISE, knots.data(), knots.size() / 2};
    }
    return u;
  }
};

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      usage_error("bad index '" + item + "'");
    }
  }
  return out;
}

std::vector<std::size_t> read_result_order(const std::string& path) {
  try {
    const auto doc = json::parse(read_text(path));
    return doc.at("order").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw Failure{RELPICK_ERR_DATA, path + ": " + e.what()};
  }
}

unsigned resolve_threads(unsigned flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("RELPICK_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      usage_error("RELPICK_THREADS must be a positive integer");
    }
  }
  return 1;
}

// --- graph -----------------------------------------------------------------

struct GraphCmd {
  EmbeddingOpts embeddings;
  double tau = 0.95;
  std::string out;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("graph", "Build and cache the thresholded cosine neighbor graph");
    embeddings.add(cmd, true);
    cmd->add_option("--tau", tau, "Neighborhood cosine threshold in (0, 1]")->required();
    cmd->add_option("--out", out, "Graph cache file")->required();
  }

  int run() {
    if (!(tau > 0 && tau <= 1)) usage_error("--tau must be in (0, 1]");
    auto e = embeddings.load();
    relpick_graph* raw = nullptr;
    check(relpick_graph_build(e.get(), tau, &raw));
    Graph g(raw);
    check(relpick_graph_save(g.get(), out.c_str()));
    relpick_degree_stats s{};
    check(relpick_graph_degree_stats(g.get(), &s));
    json j;
    j["schema"] = 1;
    j["m"] = relpick_graph_size(g.get());
    j["tau"] = tau;
    j["edges"] = relpick_graph_edge_count(g.get());
    j["degree"] = {{"min", s.min}, {"mean", s.mean}, {"max", s.max}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
};

// --- select ----------------------------------------------------------------

struct SelectCmd {
  CLI::App* cmd = nullptr;
  GraphOpts graph;
  ConfidenceOpts conf;
  UtilityOpts utility;
  std::string labels;
  std::uint32_t classes = 0;
  std::size_t budget = 0;
  std::string rule = "surrogate";
  bool balanced = false;
  bool dense = false;
  bool mask_timings = false;
  std::uint64_t seed = 0;
  std::string out;

  void add(CLI::App* app) {
    cmd = app->add_subcommand("select", "Greedy neighborhood-confidence subset selection");
    graph.add(cmd);
    conf.add(cmd);
    utility.add(cmd);
    cmd->add_option("--labels", labels, "Noisy label file (one class id per line)");
    cmd->add_option("--classes", classes, "Class count (default: max label + 1)");
    cmd->add_option("--budget", budget, "Target subset size")->required();
    cmd->add_option("--rule", rule, "Selection criterion")->check(CLI::IsMember({"surrogate", "exact", "lazy"}));
    cmd->add_flag("--balanced", balanced, "Class-balanced round-robin selection");
    cmd->add_flag("--dense", dense, "Compute neighbor rows on demand instead of storing the graph");
    cmd->add_flag("--mask-timings", mask_timings, "Write all timings as 0");
    cmd->add_option("--seed", seed, "Seed echoed into the report");
    cmd->add_option("--out", out, "Output JSON path (default stdout)");
  }

  int run() {
    graph.validate(cmd);
    if (budget == 0) usage_error("--budget must be at least 1");
    if (balanced && labels.empty()) usage_error("--balanced requires --labels");
    if (dense && graph.embeddings.path.empty()) usage_error("--dense requires --embeddings");

    relpick_config cfg = relpick_config_default();
    cfg.budget = budget;
    cfg.utility = utility.get();
    cfg.rule = rule == "exact" ? RELPICK_RULE_EXACT : rule == "lazy" ? RELPICK_RULE_LAZY : RELPICK_RULE_SURROGATE;
    cfg.balanced = balanced ? 1 : 0;
    cfg.seed = seed;

    auto c = conf.load();
    Labels l;
    if (!labels.empty()) {
      relpick_labels* raw = nullptr;
      check(relpick_labels_load(labels.c_str(), classes, &raw));
      l.reset(raw);
    }
    relpick_result* raw = nullptr;
    if (dense) {
      auto e = graph.embeddings.load();
      cfg.tau = graph.tau;
      check(relpick_select_dense(e.get(), c.get(), l.get(), &cfg, &raw));
    } else {
      auto g = graph.load();
      cfg.tau = graph.tau;
      check(relpick_select(g.get(), c.get(), l.get(), &cfg, &raw));
    }
    Result r(raw);
    CString text;
    check(relpick_result_to_json(r.get(), mask_timings ? 1 : 0, &text.p));
    write_text(out, text.p);
    return 0;
  }
};

// --- oracle ----------------------------------------------------------------

struct OracleCmd {
  CLI::App* cmd = nullptr;
  GraphOpts graph;
  ConfidenceOpts conf;
  UtilityOpts utility;
  std::size_t budget = 0;
  std::string result;

  void add(CLI::App* app) {
    cmd = app->add_subcommand("oracle", "Brute-force optimum and approximation ratio of a selection");
    graph.add(cmd);
    conf.add(cmd);
    utility.add(cmd);
    cmd->add_option("--budget", budget, "Subset size (default: size of --result)");
    cmd->add_option("--result", result, "Selection JSON whose objective is compared with the optimum");
  }

  int run() {
    graph.validate(cmd);
    std::vector<std::size_t> order;
    if (!result.empty()) order = read_result_order(result);
    if (budget == 0) budget = order.size();
    if (budget == 0) usage_error("pass --budget or --result");
    if (!order.empty() && order.size() != budget) usage_error("--budget differs from the size of --result");

    auto g = graph.load();
    auto c = conf.load();
    const auto u = utility.get();
    std::vector<std::size_t> best(budget);
    double best_obj = 0;
    check(relpick_oracle_optimum(g.get(), c.get(), budget, &u, best.data(), &best_obj));

    json j;
    j["schema"] = 1;
    j["m"] = relpick_graph_size(g.get());
    j["tau"] = graph.tau;
    j["budget"] = budget;
    j["optimum"] = {{"subset", best}, {"objective", best_obj}};
    j["bound"] = 1.0 - std::exp(-1.0);
    if (!order.empty()) {
      auto sorted = order;
      std::sort(sorted.begin(), sorted.end());
      double obj = 0, opt = 0;
      check(relpick_objective(g.get(), c.get(), sorted.data(), sorted.size(), &u, &obj));
      check(relpick_objective(g.get(), c.get(), best.data(), best.size(), &u, &opt));
      j["result_objective"] = obj;
      j["ratio"] = opt > 0 ? obj / opt : 1.0;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
};

// --- evaluate --------------------------------------------------------------

struct EvaluateCmd {
  CLI::App* cmd = nullptr;
  GraphOpts graph;
  ConfidenceOpts conf;
  UtilityOpts utility;
  std::string result;
  std::string subset;
  std::string noise_flags;

  void add(CLI::App* app) {
    cmd = app->add_subcommand("evaluate", "Objective, coverage and noise ratio of a subset");
    graph.add(cmd);
    conf.add(cmd);
    utility.add(cmd);
    cmd->add_option("--result", result, "Selection JSON to evaluate");
    cmd->add_option("--subset", subset, "Comma-separated indices to evaluate");
    cmd->add_option("--noise-flags", noise_flags, "Ground-truth noise flags (one 0/1 per line)");
  }

  int run() {
    graph.validate(cmd);
    if (result.empty() == (cmd->count("--subset") == 0)) usage_error("pass exactly one of --result or --subset");
    const auto indices = result.empty() ? parse_index_list(subset) : read_result_order(result);
    auto g = graph.load();
    auto c = conf.load();
    NoiseFlags flags;
    if (!noise_flags.empty()) {
      relpick_noise_flags* raw = nullptr;
      check(relpick_noise_flags_load(noise_flags.c_str(), &raw));
      flags.reset(raw);
    }
    const auto u = utility.get();
    CString text;
    check(relpick_evaluate_subset(g.get(), c.get(), indices.data(), indices.size(), &u, flags.get(), &text.p));
    std::cout << text.p;
    return 0;
  }
};

// --- baseline --------------------------------------------------------------

struct BaselineCmd {
  EmbeddingOpts embeddings;
  ConfidenceOpts conf;
  std::string method;
  std::size_t budget = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::size_t seed_index = 0;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("baseline", "Run a comparison selector");
    cmd->add_option("--method", method, "Selector")
        ->required()
        ->check(CLI::IsMember({"uniform", "smallloss", "margin", "kcenter"}));
    cmd->add_option("--budget", budget, "Subset size")->required();
    embeddings.add(cmd, false);
    conf.add(cmd);
    cmd->add_option("--m", m, "Dataset size (uniform only; else taken from the inputs)");
    cmd->add_option("--seed", seed, "RNG seed (uniform)");
    cmd->add_option("--seed-index", seed_index, "First center (kcenter)");
  }

  int run() {
    std::vector<std::size_t> order(budget);
    std::vector<double> steps;
    if (method == "uniform") {
      if (m == 0) usage_error("uniform needs --m");
      check(relpick_baseline_uniform(m, budget, seed, order.data()));
    } else if (method == "smallloss") {
      auto c = conf.load();
      check(relpick_baseline_small_loss(c.get(), budget, order.data()));
    } else if (method == "margin") {
      if (conf.probs.empty()) usage_error("margin needs --probs");
      relpick_probabilities* raw = nullptr;
      check(relpick_probabilities_load(conf.probs.c_str(), &raw));
      Probabilities p(raw);
      check(relpick_baseline_margin(p.get(), budget, order.data()));
    } else {
      if (embeddings.path.empty()) usage_error("kcenter needs --embeddings");
      auto e = embeddings.load();
      steps.resize(budget);
      check(relpick_baseline_kcenter(e.get(), budget, seed_index, order.data(), steps.data()));
    }
    json j;
    j["schema"] = 1;
    j["method"] = method;
    j["order"] = order;
    if (!steps.empty()) j["timings"] = {{"step_seconds", steps}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }
};

// --- generate --------------------------------------------------------------

struct GenerateCmd {
  std::size_t m = 1000;
  std::size_t d = 16;
  std::uint32_t classes = 10;
  double spread = 1.0;
  double noise = 0.2;
  std::uint64_t seed = 0;
  std::string prefix;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("generate", "Write a synthetic clustered instance with label noise");
    cmd->add_option("--m", m, "Number of examples");
    cmd->add_option("--dim", d, "Embedding dimension");
    cmd->add_option("--classes", classes, "Number of classes");
    cmd->add_option("--spread", spread, "Cluster spread");
    cmd->add_option("--noise", noise, "Fraction of noisy examples");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--out-prefix", prefix, "Writes PREFIX.emb.bin, .conf.txt, .labels.txt, .noise.txt")->required();
  }

  int run() {
    relpick_embeddings* e = nullptr;
    relpick_confidences* c = nullptr;
    relpick_labels* l = nullptr;
    relpick_noise_flags* n = nullptr;
    check(relpick_random_instance(seed, m, d, classes, spread, noise, &e, &c, &l, &n));
    Embeddings eo(e);
    Confidences co(c);
    Labels lo(l);
    NoiseFlags no(n);
    check(relpick_embeddings_save(e, (prefix + ".emb.bin").c_str(), RELPICK_FORMAT_BINARY));
    std::string conf_text, label_text, noise_text;
    char buf[64];
    for (std::size_t i = 0; i < m; ++i) {
      std::snprintf(buf, sizeof buf, "%.9g\n", relpick_confidences_data(c)[i]);
      conf_text += buf;
      label_text += std::to_string(relpick_labels_data(l)[i]) + "\n";
      noise_text += relpick_noise_flags_data(n)[i] ? "1\n" : "0\n";
    }
    write_text(prefix + ".conf.txt", conf_text);
    write_text(prefix + ".labels.txt", label_text);
    write_text(prefix + ".noise.txt", noise_text);
    return 0;
  }
};

// --- bench -----------------------------------------------------------------

struct BenchCmd {
  std::vector<std::size_t> sizes{2000, 4000, 8000, 16000};
  std::size_t d = 32;
  std::size_t steps = 200;
  std::size_t kcenter_steps = 64;
  double tau = 0.75;
  std::uint64_t seed = 0;
  std::string out;

  void add(CLI::App* app) {
    auto* cmd = app->add_subcommand("bench", "Per-step selection wall time, Prune4ReL vs kCenterGreedy");
    cmd->add_option("--sizes", sizes, "Dataset sizes")->delimiter(',');
    cmd->add_option("--dim", d, "Embedding dimension");
    cmd->add_option("--steps", steps, "Greedy steps timed per size");
    cmd->add_option("--kcenter-steps", kcenter_steps, "kCenterGreedy steps timed per size");
    cmd->add_option("--tau", tau, "Neighborhood cosine threshold in (0, 1]");
    cmd->add_option("--seed", seed, "Instance seed");
    cmd->add_option("--out", out, "CSV output (default stdout)");
  }

  int run() {
    if (!(tau > 0 && tau <= 1)) usage_error("--tau must be in (0, 1]");
    for (std::size_t m : sizes) {
      if (m < kBenchMinSize) {
        usage_error("m = " + std::to_string(m) + " is below the warm-up threshold of " + std::to_string(kBenchMinSize) +
                    "; per-step times that small are dominated by timer noise. Use --sizes with values >= " +
                    std::to_string(kBenchMinSize) + ".");
      }
      if (steps == 0 || steps > m || kcenter_steps == 0 || kcenter_steps > m) {
        usage_error("--steps and --kcenter-steps must be in [1, m]");
      }
    }
    std::string csv = "method,m,step,seconds\n";
    char buf[128];
    for (std::size_t m : sizes) {
      relpick_embeddings* e = nullptr;
      relpick_confidences* c = nullptr;
      check(relpick_random_instance(seed, m, d, 10, 1.0, 0.2, &e, &c, nullptr, nullptr));
      Embeddings eo(e);
      Confidences co(c);

      relpick_config cfg = relpick_config_default();
      cfg.budget = steps;
      cfg.tau = tau;
      relpick_result* raw = nullptr;
      check(relpick_select_dense(e, c, nullptr, &cfg, &raw));
      Result r(raw);
      const double* secs = relpick_result_step_seconds(r.get());
      for (std::size_t t = 0; t < relpick_result_size(r.get()); ++t) {
        std::snprintf(buf, sizeof buf, "prune4rel,%zu,%zu,%.9e\n", m, t, secs[t]);
        csv += buf;
      }

      std::vector<std::size_t> order(kcenter_steps);
      std::vector<double> ksecs(kcenter_steps);
      check(relpick_baseline_kcenter(e, kcenter_steps, 0, order.data(), ksecs.data()));
      for (std::size_t t = 0; t < kcenter_steps; ++t) {
        std::snprintf(buf, sizeof buf, "kcenter,%zu,%zu,%.9e\n", m, t, ksecs[t]);
        csv += buf;
      }
      std::cerr << "bench: m=" << m << " done\n";
    }
    write_text(out, csv);
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relpick: noise-robust data pruning by neighborhood confidence"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (fallback: RELPICK_THREADS)");
  app.set_version_flag("--version", std::string(relpick_version()));

  GraphCmd graph;
  SelectCmd select;
  OracleCmd oracle;
  EvaluateCmd evaluate;
  BaselineCmd baseline;
  GenerateCmd generate;
  BenchCmd bench;
  graph.add(&app);
  select.add(&app);
  oracle.add(&app);
  evaluate.add(&app);
  baseline.add(&app);
  generate.add(&app);
  bench.add(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return RELPICK_ERR_CONFIG;
  }

  try {
    relpick_set_threads(resolve_threads(threads));
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "graph") return graph.run();
    if (name == "select") return select.run();
    if (name == "oracle") return oracle.run();
    if (name == "evaluate") return evaluate.run();
    if (name == "baseline") return baseline.run();
    if (name == "generate") return generate.run();
    if (name == "bench") return bench.run();
  } catch (const Failure& f) {
    std::cerr << "relpick: " << f.message << "\n";
    return f.code;
  }
  return RELPICK_ERR_INTERNAL;
}
