#pragma once

#include <string>
#include <vector>

#include "dealer/schedule.hpp"

namespace dealer {

/// Normalized client goal y * sum(n) - sum(P_k(n_k)) - gamma_c/2 * sum(n)^2.
double eval_client_objective(const std::vector<PriceSchedule>& schedules, double gamma_c, double y,
                             const std::vector<double>& trades);

struct AdmissibilityReport {
  bool admissible = false;
  /// Empty when admissible; otherwise names the first violating interval.
  std::string diagnostics;
  double violation_lo = 0.0;
  double violation_hi = 0.0;
};

/// K >= 2: p strictly increasing on the grid and across the gap at 0.
/// K = 1: n -> gamma_c n + p(n) strictly increasing and unbounded at both ends.
/// An empty grid means 2001 points on +-10 n_scale.
AdmissibilityReport check_admissible(const PriceSchedule& schedule, int K, double gamma_c,
                                     std::vector<double> grid = {});

struct CompatibilityReport {
  bool compatible = false;
  double ell_bar = 0.0;  ///< max of the left asymptotes
  double r_bar = 0.0;    ///< min of the right asymptotes
};

/// Compatible iff max_k l_k < min_k r_k (strict).
CompatibilityReport check_compatible(const std::vector<PriceSchedule>& schedules);

/// Client response to K identical schedules.
class ClientResponse {
 public:
  ClientResponse(PriceSchedule schedule, int K, double gamma_c);

  /// Trade per dealer; 0 on the no-trade interval [a, b].
  double n_of_y(double y) const;
  double a() const { return schedule_.bid(); }
  double b() const { return schedule_.ask(); }
  int K() const { return K_; }
  const PriceSchedule& schedule() const { return schedule_; }

 private:
  PriceSchedule schedule_;
  int K_;
  double gamma_c_;
};

ClientResponse symmetric_response(const PriceSchedule& schedule, int K, double gamma_c);

struct HeterogeneousResponse {
  std::vector<double> trades;
  /// Common marginal price m* at which every dealer is traded with.
  double marginal = 0.0;
  /// True when m* hit the envelope edge and trades were capped.
  bool saturated = false;
};

/// Solves m + gamma_c * sum_k p_k^{-1}(m) = y, then n_k = p_k^{-1}(m).
/// Throws DomainError when the schedules are incompatible.
HeterogeneousResponse heterogeneous_response(const std::vector<PriceSchedule>& schedules,
                                             double gamma_c, double y);

}  // namespace dealer
