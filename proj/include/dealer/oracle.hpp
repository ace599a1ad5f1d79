#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dealer/schedule.hpp"
#include "dealer/typelaw.hpp"

namespace dealer {

enum class Perturbation { identity, marginal_shift, marginal_tilt, bump };

std::string perturbation_name(Perturbation kind);

/// A unilateral deviation from a base schedule:
///   shift: q(n) = p(n) + amount
///   tilt:  q(n) = p(n) + amount * n
///   bump:  q(n) = p(n) + amount * exp(-((n - center) / width)^2)
struct DeviationSpec {
  Perturbation kind = Perturbation::identity;
  double amount = 0.0;
  double center = 0.0;
  double width = 1.0;
};

PriceSchedule apply_deviation(const PriceSchedule& base, const DeviationSpec& dev);

/// Seeded family of shift, tilt and bump deviations with sizes between 1% and
/// 10% of the base spread; every member is admissible for K >= 2 on the check
/// grid and compatible with the base.
std::vector<DeviationSpec> random_deviations(const PriceSchedule& base, int count, std::uint64_t seed,
                                             double gamma_c);

/// Profit of dealer 1 quoting p1 while the other K-1 dealers quote p_star.
/// The type trading n with dealer 1 is p1(n) + gamma_c n + gamma_c (K-1) p_star^{-1}(p1(n)).
double deviation_profit(const TypeLaw& law, int K, double gamma_c, double gamma_d,
                        const PriceSchedule& p_star, const PriceSchedule& p1);

struct DeviationOutcome {
  double J_base = 0.0;
  double J_dev = 0.0;
};

/// Throws DomainError when the deviation is inadmissible or incompatible.
DeviationOutcome dealer_profit_deviation(const TypeLaw& law, int K, double gamma_c, double gamma_d,
                                         const PriceSchedule& p_star, const DeviationSpec& dev);

/// Pointwise dealer objectives and their derivatives, with
/// y = z + gamma_c n + gamma_c (K-1) x:
///   eta_-(n,x,z) = (gamma_d n - z) F(y) + H(y)
///   eta_+(n,x,z) = -(gamma_d n - z) Fbar(y) - Hbar(y)
class EtaFunctions {
 public:
  EtaFunctions(const TypeLaw& law, int K, double gamma_c, double gamma_d);

  double eta_minus(double n, double x, double z) const;
  double eta_plus(double n, double x, double z) const;
  /// A(n,x,z) = (gamma_d + gamma_c) n + gamma_c (K-1) x - (id - g)(y).
  double A(double n, double x, double z) const;
  /// B_-(n,x,z) = -(gamma_d + gamma_c) n - gamma_c (K-1) x + (id + F/f - g)(y).
  double B_minus(double n, double x, double z) const;
  /// B_+(n,x,z) = -(gamma_d + gamma_c) n - gamma_c (K-1) x + (id - Fbar/f - g)(y).
  double B_plus(double n, double x, double z) const;
  /// (K-1) gamma_c f(y) A(n,x,z); the same expression for both signs.
  double d_eta_dx(double n, double x, double z) const;
  /// -f(y) B_-(n,x,z) for side < 0, -f(y) B_+(n,x,z) otherwise.
  double d_eta_dz(double n, double x, double z, int side) const;
  double type(double n, double x, double z) const;

 private:
  const TypeLaw& law_;
  int K_;
  double gamma_c_;
  double gamma_d_;
};

struct PointwiseReport {
  bool pass = true;
  /// Largest eta(competitor) - eta(equilibrium); <= tol when passing.
  double worst_excess = 0.0;
  double worst_n = 0.0;
  double worst_x = 0.0;
  double worst_z = 0.0;
  /// Cases of the competitor point: x beyond n, x between n and 0, x = 0
  /// (z across the spread), x on the other side of 0.
  int case_beyond = 0;
  int case_between = 0;
  int case_zero = 0;
  int case_opposite = 0;
  int comparisons = 0;
};

/// For each n in n_grid (n != 0) compares eta(n, n, p*(n)) with eta(n, x, p*(x))
/// for x in x_grid, and with eta(n, 0, z) for `zero_points` z across the spread.
PointwiseReport pointwise_optimality_check(const TypeLaw& law, int K, double gamma_c, double gamma_d,
                                           const PriceSchedule& p_star,
                                           const std::vector<double>& n_grid,
                                           const std::vector<double>& x_grid, int zero_points = 7,
                                           double tol = 1e-9);

struct GridArgmax {
  std::vector<double> trades;
  double value = 0.0;
  /// The maximizer sits on the edge of the search range; widen it.
  bool on_boundary = false;
};

/// Brute-force maximizer of the client objective on the lattice
/// {k * step : |k * step| <= reach}. Full lattice for one or two schedules
/// (coarse pass, then every point near the coarse optimum); for more than two
/// identical schedules the common trade is searched.
class ClientGridOracle {
 public:
  ClientGridOracle(std::vector<PriceSchedule> schedules, double gamma_c, double reach, double step);
  GridArgmax argmax(double y) const;

 private:
  double objective(const std::vector<std::size_t>& idx, double y) const;

  std::vector<PriceSchedule> schedules_;
  double gamma_c_;
  double step_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> prices_;
};

GridArgmax client_grid_oracle(const std::vector<PriceSchedule>& schedules, double gamma_c, double y,
                              double reach, double step);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Draws Y from the law and averages one dealer's P(n(Y)) - g(Y) n(Y) - gamma_d/2 n(Y)^2,
/// with n(Y) the symmetric response to K identical schedules. n and P are tabulated
/// on a fine type grid and interpolated.
MonteCarloEstimate monte_carlo_profit(const TypeLaw& law, const PriceSchedule& schedule, int K,
                                      double gamma_c, double gamma_d, std::size_t samples,
                                      std::uint64_t seed);

}  // namespace dealer
