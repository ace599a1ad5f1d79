#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dealer/monopoly.hpp"
#include "dealer/schedule.hpp"
#include "dealer/typelaw.hpp"

namespace dealer {

/// Numerator and denominators of the symmetric-equilibrium ODE
///   p'(n) = (K-1) gamma_c A(n, p) / B_-(n, p)   (n < 0)
///   p'(n) = (K-1) gamma_c A(n, p) / B_+(n, p)   (n > 0)
/// with alpha = gamma_d + K gamma_c and y = z + K gamma_c n:
///   A   = alpha n - (id - g)(y)
///   B_- = -alpha n + (id + F/f - g)(y)
///   B_+ = -alpha n + (id - Fbar/f - g)(y)
class OdeCoefficients {
 public:
  OdeCoefficients(TypeLawPtr law, int K, double gamma_c, double gamma_d);

  double A(double n, double z) const;
  double B_minus(double n, double z) const;
  double B_plus(double n, double z) const;
  /// Throws SolverError when the denominator is below 1e-12 in magnitude.
  double rhs(double n, double z) const;
  /// Side-explicit version; `side` < 0 uses B_-, otherwise B_+. Valid at n = 0.
  double rhs(double n, double z, int side) const;

  /// (id - g)(y), (id + F/f - g)(y) and (id - Fbar/f - g)(y).
  double a_map(double y) const;
  double bm_map(double y) const;
  double bp_map(double y) const;

  /// Estimates inf/sup of 1 - g' (delta, C_g) and of the B-map slopes (C_f)
  /// over the part of [y_lo, y_hi] that the corridor reaches on each side.
  /// The Gaussian family uses delta = C_g = 1 - beta exactly.
  void estimate_bounds(double y_lo, double y_hi, int points = 2001);

  const TypeLaw& law() const { return *law_; }
  const TypeLawPtr& law_ptr() const { return law_; }
  int K() const { return K_; }
  double gamma_c() const { return gamma_c_; }
  double gamma_d() const { return gamma_d_; }
  double alpha() const { return alpha_; }

  double delta = std::numeric_limits<double>::quiet_NaN();
  double C_g = std::numeric_limits<double>::quiet_NaN();
  double C_f = std::numeric_limits<double>::quiet_NaN();

 private:
  TypeLawPtr law_;
  int K_;
  double gamma_c_;
  double gamma_d_;
  double alpha_;
};

/// B-root and A-root envelopes at n. For n < 0 (and side < 0) v is the lower
/// and w the upper solution; for n > 0 v is the upper and w the lower one.
struct EnvelopePair {
  double v = 0.0;
  double w = 0.0;
};

EnvelopePair envelopes(const OdeCoefficients& coef, double n, int side);

struct Epsilons {
  double eps_v = 0.0;
  double eps_w = 0.0;
};

/// eps_v zeroes alpha/delta - K gamma_c - (K-1) gamma_c delta (1-e) / (C_f e);
/// eps_w is the smallest root in (0,1) of
///   (1-e) alpha/C_g + e alpha/C_f - K gamma_c - (K-1) gamma_c C_g e / (delta (1-e)).
/// Throws DomainError when either has no root in (0,1) or eps_v + eps_w >= 1.
Epsilons choose_epsilons(const OdeCoefficients& coef);

struct SolverConfig {
  /// NaN selects -+5 sigma_Y / (gamma_c K).
  double n_minus = std::numeric_limits<double>::quiet_NaN();
  double n_plus = std::numeric_limits<double>::quiet_NaN();
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  /// Samples per side, including 0 and the window end.
  int grid_points = 2001;
  /// Slack allowed in the containment check.
  double containment_tol = 1e-8;
  /// Start the upper bid-side and lower ask-side runs from the competitive
  /// schedule when it is tighter (Gaussian, gamma_d = 0 only).
  bool use_competitive_bound = false;
};

/// One side of the sandwich on a uniform grid running from the window end
/// towards 0 (index 0 is the window end, the last index is n = 0).
struct SandwichSide {
  std::vector<double> n;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> midpoint;
  std::vector<double> slope;
  std::vector<double> v;
  std::vector<double> w;
  std::vector<double> v_eps;
  std::vector<double> w_eps;
  double gap_at_zero = 0.0;
};

struct SandwichSolution {
  PriceSchedule p_star;
  SandwichSide negative;
  SandwichSide positive;
  Epsilons eps;
  double delta = 0.0;
  double C_g = 0.0;
  double C_f = 0.0;
  double n_minus = 0.0;
  double n_plus = 0.0;
  double gap_at_zero = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  bool containment_ok = true;
  double worst_containment = 0.0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  std::vector<std::string> warnings;
};

/// Integrates the ODE from both sandwich bounds towards 0 on each side.
SandwichSolution solve_equilibrium_ode(const TypeLawPtr& law, int K, double gamma_c,
                                       double gamma_d, const SolverConfig& cfg = {});

struct FOliReport {
  bool pass = false;
  double bound = 0.0;      ///< gamma_d / gamma_c
  double sup_minus = 0.0;  ///< sup of (F/f)' - g' on (-inf, bid]
  double sup_plus = 0.0;   ///< sup of (-Fbar/f)' - g' on [ask, inf)
  double margin = 0.0;
};

FOliReport verify_f_oli(const TypeLaw& law, double gamma_c, double gamma_d, double bid, double ask,
                        double tol = 1e-12);

struct EquilibriumCertificate {
  FOliReport f_oli;
  std::optional<ThresholdResult> gaussian_beta_bound;
  double spread = 0.0;
};

EquilibriumCertificate certify_equilibrium(const TypeLaw& law, int K, double gamma_c,
                                           double gamma_d, const SandwichSolution& sol);

/// Gaussian sufficient condition for the equilibrium when gamma_d = 0.
/// beta = 1/2 is taken as the limit (z = -inf when mu_M != 0, 0 otherwise).
ThresholdResult gaussian_oli_bound(double beta, double gamma_c, double mu_M, double sigma_Y);

/// Competitive (zero-profit) schedule u(n) = h^{-1}(gamma_c K n) - gamma_c K n
/// with h_-(y) = y - H/F on the bid side and h_+(y) = y - Hbar/Fbar on the ask
/// side. `side` picks the branch at n = 0; otherwise the sign of n does.
/// Gaussian only.
double competitive_upper_solution(const TypeLaw& law, int K, double gamma_c, double n,
                                  int side = -1);

}  // namespace dealer
