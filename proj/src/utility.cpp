#include "relpick/utility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relpick/error.hpp"

namespace relpick {

Utility::Utility(UtilitySpec spec) : spec_(std::move(spec)) {
  if (spec_.kind != UtilityKind::piecewise) {
    spec_.knots.clear();
    return;
  }
  const auto& k = spec_.knots;
  if (k.empty()) fail_config("piecewise utility needs at least one knot");
  double prev_z = 0, prev_y = 0, prev_slope = INFINITY;
  for (const auto& [z, y] : k) {
    if (!std::isfinite(z) || !std::isfinite(y)) fail_config("piecewise utility knots must be finite");
    if (!(z > prev_z)) fail_config("piecewise utility knots must have strictly increasing z > 0");
    const double slope = (y - prev_y) / (z - prev_z);
    if (slope < 0) fail_config("piecewise utility must be non-decreasing");
    if (slope > prev_slope) fail_config("piecewise utility must be concave (slopes non-increasing)");
    prev_z = z;
    prev_y = y;
    prev_slope = slope;
  }
  if (auto err = check_utility_contract(*this, 2 * k.back().first); !err.empty()) fail_config(err);
}

double Utility::operator()(double z) const noexcept {
  switch (spec_.kind) {
    case UtilityKind::tanh:
      return std::tanh(z);
    case UtilityKind::identity:
      return z;
    case UtilityKind::piecewise:
      break;
  }
  const auto& k = spec_.knots;
  if (z >= k.back().first) return k.back().second;
  // First knot whose z exceeds the query; the segment starts at its predecessor.
  const auto it = std::upper_bound(k.begin(), k.end(), z, [](double v, const auto& knot) { return v < knot.first; });
  const double z0 = it == k.begin() ? 0.0 : std::prev(it)->first;
  const double y0 = it == k.begin() ? 0.0 : std::prev(it)->second;
  return y0 + (it->second - y0) * (z - z0) / (it->first - z0);
}

std::string check_utility_contract(const Utility& u, double hi, int points) {
  constexpr double slack = 1e-12;
  if (u(0.0) != 0.0) return "utility(0) = " + std::to_string(u(0.0)) + ", expected 0";
  const double step = hi / (points - 1);
  double prev = u(0.0);
  double prev_diff = INFINITY;
  for (int i = 1; i < points; ++i) {
    const double cur = u(step * i);
    const double diff = cur - prev;
    if (diff < -slack) return "utility decreases near z = " + std::to_string(step * i);
    if (diff > prev_diff + slack) return "utility is not concave near z = " + std::to_string(step * i);
    prev = cur;
    prev_diff = diff;
  }
  return {};
}

std::string_view to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::tanh:
      return "tanh";
    case UtilityKind::identity:
      return "identity";
    case UtilityKind::piecewise:
      return "piecewise";
  }
  return "?";
}

UtilityKind parse_utility_kind(std::string_view name) {
  if (name == "tanh") return UtilityKind::tanh;
  if (name == "identity") return UtilityKind::identity;
  if (name == "piecewise") return UtilityKind::piecewise;
  fail_config("unknown utility '" + std::string(name) + "' (expected tanh, identity or piecewise)");
}

}  // namespace relpick
