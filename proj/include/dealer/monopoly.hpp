#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dealer/schedule.hpp"
#include "dealer/typelaw.hpp"

namespace dealer {

struct MonopolyResult {
  PriceSchedule schedule;
  /// Root of F/f + id - g, equal to the bid p(0-).
  double y_minus = 0.0;
  /// Root of -Fbar/f + id - g, equal to the ask p(0+).
  double y_plus = 0.0;
  std::vector<double> n_grid;
  std::vector<double> marginal;
  std::vector<double> price;
  bool convex = false;
  std::optional<double> z_mon;
  std::optional<bool> z_mon_passes;
};

/// Roots y_- and y_+ of the two spread equations. They do not involve the
/// inventory costs.
std::pair<double, double> monopoly_spread_roots(const TypeLaw& law);

/// Closed-form optimal schedule of a single dealer, sampled on `n_grid`
/// (0 is dropped from the grid).
MonopolyResult monopoly_schedule(const TypeLawPtr& law, double gamma_c, double gamma_d,
                                 std::vector<double> n_grid = {});

struct ConvexityReport {
  bool convex = false;
  double bound = 0.0;      ///< gamma_d / gamma_c
  double sup_minus = 0.0;  ///< sup of (F/f)' - g' on (-inf, y_-]
  double sup_plus = 0.0;   ///< sup of (-Fbar/f)' - g' on [y_+, inf)
  double margin = 0.0;     ///< bound - max(sup_minus, sup_plus); >= 0 when convex
};

ConvexityReport monopoly_convexity_check(const TypeLaw& law, double gamma_c, double gamma_d,
                                         double y_minus, double y_plus, double tol = 1e-12);

struct ThresholdResult {
  double z = 0.0;
  bool passes = false;
};

/// Gaussian sufficient condition for a convex monopoly schedule when gamma_d = 0.
ThresholdResult z_mon_threshold(double beta, double gamma_c, double mu_M, double sigma_Y);

/// Expected profit of a dealer whose trade n is taken by type y = type_of_trade(n),
/// with y increasing in n and y(0-) <= y(0+):
///   int_{-inf}^0 (gamma_d n - p(n)) F(y) + H(y) dn + int_0^inf (p(n) - gamma_d n) Fbar(y) - Hbar(y) dn.
/// `kinks` lists trades where type_of_trade has a corner; quadrature pieces
/// are split there.
double dealer_profit(const TypeLaw& law, const PriceSchedule& schedule,
                     const std::function<double(double)>& type_of_trade, double gamma_d,
                     std::vector<double> kinks = {});

/// Profit of a single dealer quoting `schedule`; the client takes n with
/// p(n) + gamma_c n = y.
double monopoly_profit(const TypeLaw& law, const PriceSchedule& schedule, double gamma_c,
                       double gamma_d);

}  // namespace dealer
