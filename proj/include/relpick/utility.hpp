#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace relpick {

enum class UtilityKind { tanh, identity, piecewise };

/// Plain description of a utility; enough to re-create it anywhere.
struct UtilitySpec {
  UtilityKind kind = UtilityKind::tanh;
  /// Piecewise only: (z, value) breakpoints after the implicit origin (0, 0),
  /// z strictly increasing. The curve is flat past the last knot.
  std::vector<std::pair<double, double>> knots;

  friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;
};

/// Non-decreasing concave map with u(0) = 0 applied to neighborhood
/// confidence. Construction of a piecewise utility checks those properties
/// and throws a config error when they fail.
class Utility {
 public:
  Utility() = default;
  explicit Utility(UtilitySpec spec);

  static Utility tanh() { return Utility(UtilitySpec{UtilityKind::tanh, {}}); }
  static Utility identity() { return Utility(UtilitySpec{UtilityKind::identity, {}}); }
  static Utility piecewise(std::vector<std::pair<double, double>> knots) {
    return Utility(UtilitySpec{UtilityKind::piecewise, std::move(knots)});
  }

  double operator()(double z) const noexcept;
  const UtilitySpec& spec() const noexcept { return spec_; }

 private:
  UtilitySpec spec_;
};

/// Samples u on `points` evenly spaced values in [0, hi] and checks u(0) = 0,
/// monotonicity and discrete concavity. Returns an empty string when all
/// hold, otherwise a description of the first violation.
std::string check_utility_contract(const Utility& u, double hi, int points = 2001);

std::string_view to_string(UtilityKind kind);
UtilityKind parse_utility_kind(std::string_view name);

}  // namespace relpick
