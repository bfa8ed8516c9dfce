#pragma once

// Edge cost model c(x, p) = base(x) + waiting(x, p).
//
// All built-in waiting families are affine in the flow x once p is fixed, so
// most of the model reduces to a clamped linear function of x. Polynomial base
// costs are the only case that needs numeric quadrature.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tlcg {

struct Affine {
  double slope = 0.0;
  double intercept = 0.0;
  friend bool operator==(const Affine&, const Affine&) = default;
};

/// coeffs[k] multiplies x^k. Coefficients must be non-negative.
struct Polynomial {
  std::vector<double> coeffs;
  friend bool operator==(const Polynomial&, const Polynomial&) = default;
};

struct Constant {
  double value = 0.0;
  friend bool operator==(const Constant&, const Constant&) = default;
};

using BaseCost = std::variant<Affine, Polynomial, Constant>;

enum class WaitingFamily {
  Zero,               // w = 0
  SimpleExponential,  // w = x (e^p - 1)
  SumoFitted,         // w = (0.12 e^{6.12p} + 0.16) x - 10.51 e^{3.05p} + 14.51, p <= 0.85
  Blocking,           // SimpleExponential for p < 1, +inf at p = 1
};

std::string_view to_string(WaitingFamily family);
WaitingFamily waiting_family_from_string(std::string_view name);

/// Upper bound of the SumoFitted regression's validity range.
inline constexpr double kSumoFittedMaxRed = 0.85;

/// Default admissible red-proportion window for bounded light cycles.
inline constexpr double kDefaultMinRed = 0.05;
inline constexpr double kDefaultMaxRed = 0.85;

/// A fixed signal cycle. Amber after red is counted in `red`, amber after green
/// in `green`.
struct LightCycle {
  double red = 0.0;
  double green = 0.0;

  /// Builds a cycle from raw phase durations, folding one amber period into
  /// each phase (17 red + 3 amber, 17 green + 3 amber -> 20/20).
  static LightCycle from_phases(double red, double green, double amber = 3.0);

  /// Builds a cycle with period T and red proportion p.
  static LightCycle from_proportion(double period, double p);

  double period() const { return red + green; }
  double red_proportion() const { return red / period(); }

  /// Throws DomainError unless red, green >= 0 and red + green > 0.
  void validate() const;
  /// validate() plus min_red <= p <= max_red.
  void validate_bounded(double min_red = kDefaultMinRed, double max_red = kDefaultMaxRed) const;
};

struct EdgeCost {
  BaseCost base = Affine{};
  WaitingFamily waiting = WaitingFamily::Zero;
  double p = 0.0;  // red proportion at the head of the edge, 0 without a light
  friend bool operator==(const EdgeCost&, const EdgeCost&) = default;
};

double eval_base(const BaseCost& base, double x);
double base_slope(const BaseCost& base, double x);

/// Throws DomainError if `p` lies outside the family's validity range.
void check_red_proportion(WaitingFamily family, double p);

/// Raw waiting time (can be negative for SumoFitted at small x). +inf for a
/// closed Blocking light.
double eval_waiting(WaitingFamily family, double x, double p);

/// True when the edge is a Blocking family at p = 1: shortest-path searches
/// drop it instead of carrying +inf through arithmetic.
bool is_blocked(const EdgeCost& cost);

/// max(0, base(x) + waiting(x, p)); +inf exactly for a blocked edge.
double eval_cost(const EdgeCost& cost, double x);

/// dc/dx of the clamped cost (0 in the clamped region).
double cost_slope(const EdgeCost& cost, double x);

/// The fitted journey cost 0.4x + 44 + w_SumoFitted(x, p), clamped at 0.
/// Requires 0 <= p < 0.85.
double eval_fitted_journey(double x, double p);

/// Integral of eval_cost over [0, f]. Closed form for affine and constant
/// bases, adaptive Gauss-Kronrod otherwise. Throws for a blocked edge with f > 0.
double integral_cost(const EdgeCost& cost, double f);

/// d/dx [x c(x, p)] = c + x c'.
double marginal_cost(const EdgeCost& cost, double x);

/// For affine/constant bases, the (slope, intercept) of the unclamped cost at
/// the edge's p. Empty for polynomial bases and blocked edges.
std::optional<std::pair<double, double>> affine_coefficients(const EdgeCost& cost);

/// Throws DomainError if base parameters are invalid (negative slope, ...).
void validate_cost(const EdgeCost& cost);

}  // namespace tlcg
