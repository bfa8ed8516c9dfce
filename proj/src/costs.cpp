#include "tlcg/costs.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

#include "tlcg/error.hpp"

namespace tlcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Waiting family as k x + m for a fixed, non-blocking p.
struct LinearWaiting {
  double slope;
  double intercept;
};

LinearWaiting linear_waiting(WaitingFamily family, double p) {
  switch (family) {
    case WaitingFamily::Zero:
      return {0.0, 0.0};
    case WaitingFamily::SimpleExponential:
    case WaitingFamily::Blocking:
      return {std::exp(p) - 1.0, 0.0};
    case WaitingFamily::SumoFitted:
      return {0.12 * std::exp(6.12 * p) + 0.16, -10.51 * std::exp(3.05 * p) + 14.51};
  }
  return {0.0, 0.0};
}

bool has_affine_base(const BaseCost& base) {
  return !std::holds_alternative<Polynomial>(base);
}

// Base as a x + b for affine and constant bases.
std::pair<double, double> base_line(const BaseCost& base) {
  if (const auto* a = std::get_if<Affine>(&base)) return {a->slope, a->intercept};
  return {0.0, std::get<Constant>(base).value};
}

// Integral of max(0, slope z + intercept) over [0, f].
double positive_part_integral(double slope, double intercept, double f) {
  if (f <= 0.0) return 0.0;
  auto raw = [&](double lo, double hi) {
    return slope * (hi * hi - lo * lo) / 2.0 + intercept * (hi - lo);
  };
  if (slope == 0.0) return intercept > 0.0 ? intercept * f : 0.0;
  const double root = -intercept / slope;
  if (slope > 0.0) {
    if (root <= 0.0) return raw(0.0, f);
    if (root >= f) return 0.0;
    return raw(root, f);
  }
  if (root <= 0.0) return 0.0;
  return raw(0.0, std::min(root, f));
}

}  // namespace

std::string_view to_string(WaitingFamily family) {
  switch (family) {
    case WaitingFamily::Zero:
      return "zero";
    case WaitingFamily::SimpleExponential:
      return "simple_exp";
    case WaitingFamily::SumoFitted:
      return "sumo_fitted";
    case WaitingFamily::Blocking:
      return "blocking";
  }
  return "zero";
}

WaitingFamily waiting_family_from_string(std::string_view name) {
  if (name == "zero") return WaitingFamily::Zero;
  if (name == "simple_exp") return WaitingFamily::SimpleExponential;
  if (name == "sumo_fitted") return WaitingFamily::SumoFitted;
  if (name == "blocking") return WaitingFamily::Blocking;
  throw DomainError("unknown waiting family '" + std::string(name) + "'");
}

LightCycle LightCycle::from_phases(double red, double green, double amber) {
  return LightCycle{red + amber, green + amber};
}

LightCycle LightCycle::from_proportion(double period, double p) {
  LightCycle cycle{p * period, (1.0 - p) * period};
  cycle.validate();
  return cycle;
}

void LightCycle::validate() const {
  if (!(red >= 0.0) || !(green >= 0.0)) throw DomainError("light cycle phases must be non-negative");
  if (!(period() > 0.0)) throw DomainError("light cycle period must be positive");
}

void LightCycle::validate_bounded(double min_red, double max_red) const {
  validate();
  const double p = red_proportion();
  if (p < min_red || p > max_red) {
    throw DomainError("red proportion " + std::to_string(p) + " outside [" +
                      std::to_string(min_red) + ", " + std::to_string(max_red) + "]");
  }
}

double eval_base(const BaseCost& base, double x) {
  if (const auto* poly = std::get_if<Polynomial>(&base)) {
    double value = 0.0;
    for (auto it = poly->coeffs.rbegin(); it != poly->coeffs.rend(); ++it) value = value * x + *it;
    return value;
  }
  const auto [a, b] = base_line(base);
  return a * x + b;
}

double base_slope(const BaseCost& base, double x) {
  if (const auto* poly = std::get_if<Polynomial>(&base)) {
    double value = 0.0;
    for (std::size_t k = poly->coeffs.size(); k-- > 1;) value = value * x + static_cast<double>(k) * poly->coeffs[k];
    return value;
  }
  return base_line(base).first;
}

void check_red_proportion(WaitingFamily family, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("red proportion " + std::to_string(p) + " outside [0, 1]");
  }
  if (family == WaitingFamily::SumoFitted && p > kSumoFittedMaxRed) {
    throw DomainError("sumo_fitted waiting is only valid for p <= 0.85 (got " + std::to_string(p) + ")");
  }
}

double eval_waiting(WaitingFamily family, double x, double p) {
  check_red_proportion(family, p);
  if (family == WaitingFamily::Blocking && p >= 1.0) return kInf;
  const auto w = linear_waiting(family, p);
  return w.slope * x + w.intercept;
}

bool is_blocked(const EdgeCost& cost) {
  return cost.waiting == WaitingFamily::Blocking && cost.p >= 1.0;
}

double eval_cost(const EdgeCost& cost, double x) {
  const double w = eval_waiting(cost.waiting, x, cost.p);
  if (std::isinf(w)) return kInf;
  return std::max(0.0, eval_base(cost.base, x) + w);
}

double cost_slope(const EdgeCost& cost, double x) {
  check_red_proportion(cost.waiting, cost.p);
  if (is_blocked(cost)) return 0.0;
  const auto w = linear_waiting(cost.waiting, cost.p);
  const double raw = eval_base(cost.base, x) + w.slope * x + w.intercept;
  if (raw < 0.0) return 0.0;
  return base_slope(cost.base, x) + w.slope;
}

double eval_fitted_journey(double x, double p) {
  if (!(p >= 0.0) || !(p < kSumoFittedMaxRed)) {
    throw DomainError("fitted journey cost requires 0 <= p < 0.85 (got " + std::to_string(p) + ")");
  }
  const double base = 0.4 * x + 44.0;
  const double waiting = (0.12 * std::exp(6.12 * p) + 0.16) * x - 10.51 * std::exp(3.05 * p) + 14.51;
  return std::max(0.0, base + waiting);
}

double integral_cost(const EdgeCost& cost, double f) {
  check_red_proportion(cost.waiting, cost.p);
  if (f < 0.0) throw DomainError("integral_cost requires a non-negative load");
  if (f == 0.0) return 0.0;
  if (is_blocked(cost)) throw DomainError("integral_cost: infinite cost on the interval");
  if (has_affine_base(cost.base)) {
    const auto [a, b] = base_line(cost.base);
    const auto w = linear_waiting(cost.waiting, cost.p);
    return positive_part_integral(a + w.slope, b + w.intercept, f);
  }
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate([&](double z) { return eval_cost(cost, z); }, 0.0, f,
                                              15, 1e-10);
}

double marginal_cost(const EdgeCost& cost, double x) {
  const double c = eval_cost(cost, x);
  if (std::isinf(c)) return c;
  return c + x * cost_slope(cost, x);
}

std::optional<std::pair<double, double>> affine_coefficients(const EdgeCost& cost) {
  if (!has_affine_base(cost.base) || is_blocked(cost)) return std::nullopt;
  check_red_proportion(cost.waiting, cost.p);
  const auto [a, b] = base_line(cost.base);
  const auto w = linear_waiting(cost.waiting, cost.p);
  return std::pair{a + w.slope, b + w.intercept};
}

void validate_cost(const EdgeCost& cost) {
  if (const auto* a = std::get_if<Affine>(&cost.base)) {
    if (!(a->slope >= 0.0) || !(a->intercept >= 0.0)) {
      throw DomainError("affine base cost needs a >= 0 and b >= 0");
    }
  } else if (const auto* c = std::get_if<Constant>(&cost.base)) {
    if (!(c->value >= 0.0)) throw DomainError("constant base cost must be non-negative");
  } else {
    const auto& poly = std::get<Polynomial>(cost.base);
    if (poly.coeffs.empty()) throw DomainError("polynomial base cost needs at least one coefficient");
    for (double k : poly.coeffs) {
      if (!(k >= 0.0)) throw DomainError("polynomial base cost coefficients must be non-negative");
    }
  }
  check_red_proportion(cost.waiting, cost.p);
}

}  // namespace tlcg
