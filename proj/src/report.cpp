#include <json.hpp>

#include "relpick/pruner.hpp"

namespace relpick {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json utility_json(const Utility& u) {
  ordered_json j;
  j["kind"] = to_string(u.spec().kind);
  if (u.spec().kind == UtilityKind::piecewise) {
    auto knots = ordered_json::array();
    for (const auto& [z, y] : u.spec().knots) knots.push_back({z, y});
    j["knots"] = std::move(knots);
  }
  return j;
}

}  // namespace

std::string to_json(const SelectionResult& r, bool mask_timings) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["m"] = r.m;
  j["config"] = {
      {"budget", r.config.budget},
      {"tau", r.config.tau},
      {"utility", utility_json(r.config.utility)},
      {"rule", to_string(r.config.rule)},
      {"balanced", r.config.balanced},
      {"seed", r.config.seed},
  };
  j["order"] = r.order;
  j["gains"] = r.gains;
  j["objective_trace"] = r.objective_trace;
  j["objective"] = r.objective_trace.empty() ? 0.0 : r.objective_trace.back();
  double total = 0;
  for (double s : r.step_seconds) total += s;
  if (mask_timings) {
    j["timings"] = {{"step_seconds", std::vector<double>(r.step_seconds.size(), 0.0)}, {"total_seconds", 0.0}};
  } else {
    j["timings"] = {{"step_seconds", r.step_seconds}, {"total_seconds", total}};
  }
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

std::string to_json(const SubsetReport& r) {
  ordered_json j;
  j["schema"] = kSchemaVersion;
  j["m"] = r.m;
  j["selected"] = r.selected;
  j["objective"] = r.objective;
  j["coverage"] = r.coverage;
  j["cn"] = {{"min", r.cn_min}, {"mean", r.cn_mean}, {"median", r.cn_median}, {"max", r.cn_max}};
  j["noise_ratio"] = r.noise_ratio ? ordered_json(*r.noise_ratio) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace relpick
