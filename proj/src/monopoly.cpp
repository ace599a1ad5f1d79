#include "dealer/monopoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dealer/numerics.hpp"

namespace dealer {

namespace {

// The two monotone maps whose inverses give the schedule: F/f + id - g on the
// bid side and -Fbar/f + id - g on the ask side.
double phi_minus(const TypeLaw& law, double y) {
  return law.hazard_minus(y) + y - law.cond_mean(y);
}
double phi_plus(const TypeLaw& law, double y) { return -law.hazard_plus(y) + y - law.cond_mean(y); }

double invert(const std::function<double(double)>& fn, double target, double guess, double scale,
              const char* what) {
  const auto r = num::solve_increasing(fn, target, guess, scale, 1e-13 * scale);
  if (!r.ok) throw SolverError(std::string("monopoly inversion failed: ") + what);
  return r.x;
}

// Integral over one half-line, walking outward from 0 in doubling pieces until
// the integrand weight is negligible. Pieces are split at the given kinks.
double half_line_integral(const std::function<double(double)>& integrand,
                          const std::function<double(double)>& weight, double direction,
                          double scale, const std::vector<double>& kinks) {
  auto piece = [&](double a, double b) {
    double total = 0.0;
    double from = a;
    for (double k : kinks) {
      const double t = direction * k;
      if (t > a && t < b) {
        total += num::integrate(integrand, direction * from, direction * t, 1e-10);
        from = t;
      }
    }
    total += num::integrate(integrand, direction * from, direction * b, 1e-10);
    return direction * total;
  };
  double total = piece(0.0, scale);
  double inner = scale;
  for (int k = 0; k < 200; ++k) {
    const double outer = 2.0 * inner;
    const double part = piece(inner, outer);
    total += part;
    inner = outer;
    if (weight(direction * inner) < 1e-17 && std::abs(part) < 1e-17) return total;
  }
  throw SolverError("dealer profit integrand does not decay");
}

}  // namespace

std::pair<double, double> monopoly_spread_roots(const TypeLaw& law) {
  const double scale = law.scale();
  const double y_minus = invert([&](double y) { return phi_minus(law, y); }, 0.0, law.mean(), scale,
                                "bid root");
  const double y_plus = invert([&](double y) { return phi_plus(law, y); }, 0.0, law.mean(), scale,
                               "ask root");
  return {y_minus, y_plus};
}

MonopolyResult monopoly_schedule(const TypeLawPtr& law_ptr, double gamma_c, double gamma_d,
                                 std::vector<double> n_grid) {
  if (!law_ptr) throw DomainError("missing type law");
  if (!(gamma_c > 0.0)) throw DomainError("gamma_c must be positive");
  if (!(gamma_d >= 0.0)) throw DomainError("gamma_d must be nonnegative");
  const TypeLaw& law = *law_ptr;
  const auto [y_minus, y_plus] = monopoly_spread_roots(law);
  if (!(y_minus < y_plus)) throw SolverError("monopoly spread roots are not ordered");

  const double slope_total = gamma_d + gamma_c;
  const double scale = law.scale();
  TypeLawPtr keep = law_ptr;
  auto type_at = [keep, y_minus, y_plus, slope_total, scale](double n) {
    const TypeLaw& tl = *keep;
    if (n < 0.0)
      return invert([&](double y) { return phi_minus(tl, y); }, slope_total * n, y_minus, scale,
                    "bid side");
    return invert([&](double y) { return phi_plus(tl, y); }, slope_total * n, y_plus, scale,
                  "ask side");
  };
  auto marginal = [type_at, gamma_c](double n) { return type_at(n) - gamma_c * n; };
  auto slope = [keep, type_at, slope_total, gamma_c](double n) {
    const TypeLaw& tl = *keep;
    const double y = type_at(n);
    const double hazard_slope = n < 0.0 ? tl.hazard_minus_slope(y) : -tl.hazard_plus_slope(y);
    return slope_total / (1.0 + hazard_slope - tl.cond_mean_slope(y)) - gamma_c;
  };

  MonopolyResult out;
  out.schedule = PriceSchedule::from_function(marginal, y_minus, y_plus, -PriceSchedule::kInf,
                                              PriceSchedule::kInf, slope, scale / gamma_c);
  out.y_minus = y_minus;
  out.y_plus = y_plus;
  n_grid.erase(std::remove(n_grid.begin(), n_grid.end(), 0.0), n_grid.end());
  std::sort(n_grid.begin(), n_grid.end());
  out.n_grid = n_grid;
  for (double n : n_grid) out.marginal.push_back(out.schedule.marginal(n));
  out.price = prices_on_grid(out.schedule, n_grid);
  out.convex = monopoly_convexity_check(law, gamma_c, gamma_d, y_minus, y_plus).convex;
  if (law.beta()) {
    const auto th = z_mon_threshold(*law.beta(), gamma_c, law.spec().mu_M, law.scale());
    out.z_mon = th.z;
    out.z_mon_passes = th.passes;
  }
  return out;
}

ConvexityReport monopoly_convexity_check(const TypeLaw& law, double gamma_c, double gamma_d,
                                         double y_minus, double y_plus, double tol) {
  ConvexityReport report;
  report.bound = gamma_d / gamma_c;
  const double reach = 12.0 * law.scale();
  report.sup_minus = -PriceSchedule::kInf;
  for (double y : num::linspace(y_minus - reach, y_minus, 2001))
    report.sup_minus = std::max(report.sup_minus, law.hazard_minus_slope(y) - law.cond_mean_slope(y));
  report.sup_plus = -PriceSchedule::kInf;
  for (double y : num::linspace(y_plus, y_plus + reach, 2001))
    report.sup_plus = std::max(report.sup_plus, -law.hazard_plus_slope(y) - law.cond_mean_slope(y));
  report.margin = report.bound - std::max(report.sup_minus, report.sup_plus);
  report.convex = report.margin >= -tol;
  return report;
}

ThresholdResult z_mon_threshold(double beta, double gamma_c, double mu_M, double sigma_Y) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
  const double c = gamma_c * std::abs(mu_M) / sigma_Y;
  const double half = c / (2.0 * (1.0 - beta));
  ThresholdResult out;
  out.z = half - std::sqrt(half * half + 1.0);
  out.passes = c * c < std::numbers::pi / 2.0 && beta >= 1.0 + out.z * num::mills_lower(out.z);
  return out;
}

double dealer_profit(const TypeLaw& law, const PriceSchedule& schedule,
                     const std::function<double(double)>& type_of_trade, double gamma_d,
                     std::vector<double> kinks) {
  std::sort(kinks.begin(), kinks.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  std::vector<double> neg, pos;
  for (double k : kinks) (k < 0.0 ? neg : pos).push_back(k);
  const double scale = schedule.n_scale();
  auto bid_side = [&](double n) {
    if (n == 0.0) return 0.0;
    const double y = type_of_trade(n);
    return (gamma_d * n - schedule.marginal(n)) * law.cdf(y) + law.partial_payoff(y);
  };
  auto ask_side = [&](double n) {
    if (n == 0.0) return 0.0;
    const double y = type_of_trade(n);
    return (schedule.marginal(n) - gamma_d * n) * law.sf(y) - law.tail_payoff(y);
  };
  auto bid_weight = [&](double n) {
    const double y = type_of_trade(n);
    return law.cdf(y) * (1.0 + std::abs(y) + std::abs(schedule.marginal(n)) + gamma_d * std::abs(n));
  };
  auto ask_weight = [&](double n) {
    const double y = type_of_trade(n);
    return law.sf(y) * (1.0 + std::abs(y) + std::abs(schedule.marginal(n)) + gamma_d * std::abs(n));
  };
  return half_line_integral(bid_side, bid_weight, -1.0, scale, neg) +
         half_line_integral(ask_side, ask_weight, 1.0, scale, pos);
}

double monopoly_profit(const TypeLaw& law, const PriceSchedule& schedule, double gamma_c,
                       double gamma_d) {
  return dealer_profit(
      law, schedule, [&](double n) { return schedule.marginal(n) + gamma_c * n; }, gamma_d);
}

}  // namespace dealer
