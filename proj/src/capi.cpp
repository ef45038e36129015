#include <algorithm>
#include <atomic>
#include <cstring>
#include <memory>
#include <string>

#include "relpick/baselines.hpp"
#include "relpick/error.hpp"
#include "relpick/oracle.hpp"
#include "relpick/pruner.hpp"
#include "relpick/relpick.h"

struct relpick_embeddings {
  relpick::EmbeddingMatrix value;
};
struct relpick_confidences {
  relpick::ConfidenceVector value;
};
struct relpick_probabilities {
  relpick::ProbabilityMatrix value;
};
struct relpick_labels {
  relpick::LabelVector value;
};
struct relpick_noise_flags {
  relpick::NoiseFlagVector value;
};
struct relpick_graph {
  relpick::NeighborGraph value;
};
struct relpick_result {
  relpick::SelectionResult value;
};

namespace {

thread_local std::string g_last_error;
std::atomic<unsigned> g_threads{1};

template <class Fn>
relpick_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return RELPICK_OK;
  } catch (const relpick::Error& e) {
    g_last_error = e.what();
    return static_cast<relpick_status>(static_cast<int>(e.kind()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return RELPICK_ERR_INTERNAL;
}

template <class T>
void require(const T* p, const char* what) {
  if (p == nullptr) relpick::fail_config(std::string(what) + " must not be NULL");
}

template <class Handle, class Value>
void emit(Handle** out, Value&& v) {
  require(out, "output pointer");
  *out = new Handle{std::forward<Value>(v)};
}

relpick::Utility to_utility(const relpick_utility* u) {
  if (u == nullptr) return relpick::Utility::tanh();
  switch (u->kind) {
    case RELPICK_UTILITY_TANH:
      return relpick::Utility::tanh();
    case RELPICK_UTILITY_IDENTITY:
      return relpick::Utility::identity();
    case RELPICK_UTILITY_PIECEWISE: {
      if (u->knot_count > 0) require(u->knots, "utility knots");
      std::vector<std::pair<double, double>> knots(u->knot_count);
      for (std::size_t k = 0; k < u->knot_count; ++k) knots[k] = {u->knots[2 * k], u->knots[2 * k + 1]};
      return relpick::Utility::piecewise(std::move(knots));
    }
  }
  relpick::fail_config("unknown utility kind " + std::to_string(static_cast<int>(u->kind)));
}

relpick::SelectionConfig to_config(const relpick_config* c) {
  require(c, "config");
  relpick::SelectionConfig cfg;
  cfg.budget = c->budget;
  cfg.tau = c->tau;
  cfg.utility = to_utility(&c->utility);
  switch (c->rule) {
    case RELPICK_RULE_SURROGATE:
      cfg.rule = relpick::GainRule::surrogate;
      break;
    case RELPICK_RULE_EXACT:
      cfg.rule = relpick::GainRule::exact;
      break;
    case RELPICK_RULE_LAZY:
      cfg.rule = relpick::GainRule::lazy;
      break;
    default:
      relpick::fail_config("unknown rule " + std::to_string(static_cast<int>(c->rule)));
  }
  cfg.balanced = c->balanced != 0;
  cfg.seed = c->seed;
  return cfg;
}

relpick::MatrixFormat to_format(relpick_format f) {
  switch (f) {
    case RELPICK_FORMAT_BINARY:
      return relpick::MatrixFormat::binary;
    case RELPICK_FORMAT_CSV:
      return relpick::MatrixFormat::csv;
  }
  relpick::fail_config("unknown matrix format");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::span<const std::size_t> subset_view(const size_t* subset, size_t n) {
  if (n > 0) require(subset, "subset");
  return {subset, n};
}

void copy_indices(const std::vector<std::size_t>& from, size_t* out) {
  if (!from.empty()) require(out, "index output");
  std::copy(from.begin(), from.end(), out);
}

}  // namespace

extern "C" {

const char* relpick_last_error(void) { return g_last_error.c_str(); }
const char* relpick_version(void) { return "1.0.0"; }
void relpick_string_free(char* s) { std::free(s); }
void relpick_set_threads(unsigned threads) { g_threads = threads == 0 ? 1 : threads; }

// --- embeddings ---

relpick_status relpick_embeddings_load(const char* path, relpick_format format, size_t average_groups,
                                       relpick_embeddings** out) {
  return guarded([&] {
    require(path, "path");
    std::optional<std::size_t> groups;
    if (average_groups > 0) groups = average_groups;
    emit(out, relpick::read_embeddings(path, to_format(format), groups));
  });
}

relpick_status relpick_embeddings_create(size_t rows, size_t cols, const float* data, relpick_embeddings** out) {
  return guarded([&] {
    require(data, "data");
    emit(out, relpick::EmbeddingMatrix(rows, cols, std::vector<float>(data, data + rows * cols)));
  });
}

relpick_status relpick_embeddings_save(const relpick_embeddings* e, const char* path, relpick_format format) {
  return guarded([&] {
    require(e, "embeddings");
    require(path, "path");
    if (to_format(format) == relpick::MatrixFormat::binary) {
      relpick::write_embeddings(path, e->value);
    } else {
      relpick::write_embeddings_csv(path, e->value);
    }
  });
}

size_t relpick_embeddings_rows(const relpick_embeddings* e) { return e ? e->value.rows() : 0; }
size_t relpick_embeddings_cols(const relpick_embeddings* e) { return e ? e->value.cols() : 0; }
const float* relpick_embeddings_data(const relpick_embeddings* e) { return e ? e->value.data().data() : nullptr; }
void relpick_embeddings_free(relpick_embeddings* e) { delete e; }

// --- confidences and friends ---

relpick_status relpick_confidences_load(const char* path, relpick_confidences** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, relpick::read_confidences(path));
  });
}

relpick_status relpick_confidences_create(size_t n, const float* values, relpick_confidences** out) {
  return guarded([&] {
    require(values, "values");
    emit(out, relpick::ConfidenceVector(std::vector<float>(values, values + n)));
  });
}

relpick_status relpick_confidences_from_probabilities(const relpick_probabilities* p, relpick_metric metric,
                                                      relpick_confidences** out) {
  return guarded([&] {
    require(p, "probabilities");
    relpick::ConfidenceMetric m;
    switch (metric) {
      case RELPICK_METRIC_MAXPROB:
        m = relpick::ConfidenceMetric::maxprob;
        break;
      case RELPICK_METRIC_DIFFPROB:
        m = relpick::ConfidenceMetric::diffprob;
        break;
      default:
        relpick::fail_config("unknown confidence metric");
    }
    emit(out, relpick::confidence_from_probs(p->value, m));
  });
}

relpick_status relpick_confidences_save(const relpick_confidences* c, const char* path) {
  return guarded([&] {
    require(c, "confidences");
    require(path, "path");
    relpick::write_confidences(path, c->value);
  });
}

size_t relpick_confidences_size(const relpick_confidences* c) { return c ? c->value.size() : 0; }
const float* relpick_confidences_data(const relpick_confidences* c) { return c ? c->value.values().data() : nullptr; }
void relpick_confidences_free(relpick_confidences* c) { delete c; }

relpick_status relpick_probabilities_load(const char* path, relpick_probabilities** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, relpick::read_probabilities(path));
  });
}

relpick_status relpick_probabilities_create(size_t rows, size_t cols, const float* data, relpick_probabilities** out) {
  return guarded([&] {
    require(data, "data");
    emit(out, relpick::ProbabilityMatrix(rows, cols, std::vector<float>(data, data + rows * cols)));
  });
}

size_t relpick_probabilities_rows(const relpick_probabilities* p) { return p ? p->value.rows() : 0; }
void relpick_probabilities_free(relpick_probabilities* p) { delete p; }

relpick_status relpick_labels_load(const char* path, uint32_t class_count, relpick_labels** out) {
  return guarded([&] {
    require(path, "path");
    std::optional<std::uint32_t> classes;
    if (class_count > 0) classes = class_count;
    emit(out, relpick::read_labels(path, classes));
  });
}

relpick_status relpick_labels_create(size_t n, const uint32_t* values, uint32_t class_count, relpick_labels** out) {
  return guarded([&] {
    if (n > 0) require(values, "values");
    emit(out, relpick::LabelVector(std::vector<std::uint32_t>(values, values + n), class_count));
  });
}

size_t relpick_labels_size(const relpick_labels* l) { return l ? l->value.size() : 0; }
uint32_t relpick_labels_class_count(const relpick_labels* l) { return l ? l->value.class_count() : 0; }
const uint32_t* relpick_labels_data(const relpick_labels* l) { return l ? l->value.values().data() : nullptr; }
void relpick_labels_free(relpick_labels* l) { delete l; }

relpick_status relpick_noise_flags_load(const char* path, relpick_noise_flags** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, relpick::read_noise_flags(path));
  });
}

relpick_status relpick_noise_flags_create(size_t n, const uint8_t* values, relpick_noise_flags** out) {
  return guarded([&] {
    if (n > 0) require(values, "values");
    relpick::NoiseFlagVector flags(n);
    for (std::size_t i = 0; i < n; ++i) flags[i] = values[i] ? 1 : 0;
    emit(out, std::move(flags));
  });
}

size_t relpick_noise_flags_size(const relpick_noise_flags* f) { return f ? f->value.size() : 0; }
const uint8_t* relpick_noise_flags_data(const relpick_noise_flags* f) { return f ? f->value.data() : nullptr; }
void relpick_noise_flags_free(relpick_noise_flags* f) { delete f; }

// --- graph ---

relpick_status relpick_graph_build(const relpick_embeddings* e, double tau, relpick_graph** out) {
  return guarded([&] {
    require(e, "embeddings");
    emit(out, relpick::build_graph(e->value, tau, g_threads.load()));
  });
}

relpick_status relpick_graph_load(const char* path, relpick_graph** out) {
  return guarded([&] {
    require(path, "path");
    emit(out, relpick::load_graph(path));
  });
}

relpick_status relpick_graph_save(const relpick_graph* g, const char* path) {
  return guarded([&] {
    require(g, "graph");
    require(path, "path");
    relpick::save_graph(path, g->value);
  });
}

size_t relpick_graph_size(const relpick_graph* g) { return g ? g->value.size() : 0; }
double relpick_graph_tau(const relpick_graph* g) { return g ? g->value.tau() : 0.0; }
size_t relpick_graph_edge_count(const relpick_graph* g) { return g ? g->value.edge_count() : 0; }

relpick_status relpick_graph_degree_stats(const relpick_graph* g, relpick_degree_stats* out) {
  return guarded([&] {
    require(g, "graph");
    require(out, "output");
    const auto s = relpick::degree_stats(g->value);
    *out = {s.min, s.mean, s.max};
  });
}

void relpick_graph_free(relpick_graph* g) { delete g; }

// --- selection ---

relpick_config relpick_config_default(void) {
  relpick_config c{};
  c.budget = 1;
  c.tau = 0.95;
  c.utility = {RELPICK_UTILITY_TANH, nullptr, 0};
  c.rule = RELPICK_RULE_SURROGATE;
  c.balanced = 0;
  c.seed = 0;
  return c;
}

relpick_status relpick_select(const relpick_graph* g, const relpick_confidences* c, const relpick_labels* labels,
                              const relpick_config* config, relpick_result** out) {
  return guarded([&] {
    require(g, "graph");
    require(c, "confidences");
    const auto cfg = to_config(config);
    emit(out, relpick::select(g->value, c->value, labels ? &labels->value : nullptr, cfg));
  });
}

relpick_status relpick_select_dense(const relpick_embeddings* e, const relpick_confidences* c,
                                    const relpick_labels* labels, const relpick_config* config, relpick_result** out) {
  return guarded([&] {
    require(e, "embeddings");
    require(c, "confidences");
    const auto cfg = to_config(config);
    const relpick::DenseNeighbors source(e->value, cfg.tau);
    emit(out, relpick::select(source, c->value, labels ? &labels->value : nullptr, cfg));
  });
}

size_t relpick_result_size(const relpick_result* r) { return r ? r->value.order.size() : 0; }
const size_t* relpick_result_order(const relpick_result* r) { return r ? r->value.order.data() : nullptr; }
const double* relpick_result_gains(const relpick_result* r) { return r ? r->value.gains.data() : nullptr; }
const double* relpick_result_objective_trace(const relpick_result* r) {
  return r ? r->value.objective_trace.data() : nullptr;
}
const double* relpick_result_step_seconds(const relpick_result* r) {
  return r ? r->value.step_seconds.data() : nullptr;
}
size_t relpick_result_warning_count(const relpick_result* r) { return r ? r->value.warnings.size() : 0; }

relpick_status relpick_result_to_json(const relpick_result* r, int mask_timings, char** json) {
  return guarded([&] {
    require(r, "result");
    require(json, "output");
    *json = dup_string(relpick::to_json(r->value, mask_timings != 0));
  });
}

void relpick_result_free(relpick_result* r) { delete r; }

relpick_status relpick_objective(const relpick_graph* g, const relpick_confidences* c, const size_t* subset,
                                 size_t subset_size, const relpick_utility* utility, double* out) {
  return guarded([&] {
    require(g, "graph");
    require(c, "confidences");
    require(out, "output");
    *out = relpick::objective(g->value, c->value, subset_view(subset, subset_size), to_utility(utility));
  });
}

relpick_status relpick_evaluate_subset(const relpick_graph* g, const relpick_confidences* c, const size_t* subset,
                                       size_t subset_size, const relpick_utility* utility,
                                       const relpick_noise_flags* flags, char** json) {
  return guarded([&] {
    require(g, "graph");
    require(c, "confidences");
    require(json, "output");
    const auto report = relpick::evaluate_subset(g->value, c->value, subset_view(subset, subset_size),
                                                 to_utility(utility), flags ? &flags->value : nullptr);
    *json = dup_string(relpick::to_json(report));
  });
}

// --- oracle ---

relpick_status relpick_oracle_optimum(const relpick_graph* g, const relpick_confidences* c, size_t s,
                                      const relpick_utility* utility, size_t* subset_out, double* objective_out) {
  return guarded([&] {
    require(g, "graph");
    require(c, "confidences");
    require(objective_out, "objective output");
    const auto best = relpick::oracle::brute_force_optimum(g->value, c->value, s, to_utility(utility).spec());
    copy_indices(best.subset, subset_out);
    *objective_out = best.objective;
  });
}

relpick_status relpick_oracle_naive_objective(const relpick_embeddings* e, const relpick_confidences* c, double tau,
                                              const size_t* subset, size_t subset_size,
                                              const relpick_utility* utility, double* out) {
  return guarded([&] {
    require(e, "embeddings");
    require(c, "confidences");
    require(out, "output");
    *out = relpick::oracle::naive_objective(e->value, c->value, tau, subset_view(subset, subset_size),
                                            to_utility(utility).spec());
  });
}

relpick_status relpick_random_instance(uint64_t seed, size_t m, size_t d, uint32_t classes, double cluster_spread,
                                       double noise_fraction, relpick_embeddings** embeddings,
                                       relpick_confidences** confidences, relpick_labels** labels,
                                       relpick_noise_flags** noise) {
  return guarded([&] {
    auto inst = relpick::oracle::random_instance({seed, m, d, classes, cluster_spread, noise_fraction});
    std::unique_ptr<relpick_embeddings> e(new relpick_embeddings{std::move(inst.embeddings)});
    std::unique_ptr<relpick_confidences> c(new relpick_confidences{std::move(inst.confidences)});
    std::unique_ptr<relpick_labels> l(new relpick_labels{std::move(inst.labels)});
    std::unique_ptr<relpick_noise_flags> n(new relpick_noise_flags{std::move(inst.noise)});
    if (embeddings) *embeddings = e.release();
    if (confidences) *confidences = c.release();
    if (labels) *labels = l.release();
    if (noise) *noise = n.release();
  });
}

// --- baselines ---

relpick_status relpick_baseline_uniform(size_t m, size_t s, uint64_t seed, size_t* out) {
  return guarded([&] { copy_indices(relpick::baselines::select_uniform(m, s, seed), out); });
}

relpick_status relpick_baseline_small_loss(const relpick_confidences* c, size_t s, size_t* out) {
  return guarded([&] {
    require(c, "confidences");
    copy_indices(relpick::baselines::select_small_loss(c->value, s), out);
  });
}

relpick_status relpick_baseline_margin(const relpick_probabilities* p, size_t s, size_t* out) {
  return guarded([&] {
    require(p, "probabilities");
    copy_indices(relpick::baselines::select_margin(p->value, s), out);
  });
}

relpick_status relpick_baseline_kcenter(const relpick_embeddings* e, size_t s, size_t seed_index, size_t* out,
                                        double* step_seconds) {
  return guarded([&] {
    require(e, "embeddings");
    const auto r = relpick::baselines::select_kcenter(e->value, s, seed_index);
    copy_indices(r.order, out);
    if (step_seconds != nullptr) std::copy(r.step_seconds.begin(), r.step_seconds.end(), step_seconds);
  });
}

}  // extern "C"
