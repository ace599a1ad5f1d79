#include "dealer/client.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dealer/numerics.hpp"

namespace dealer {

double eval_client_objective(const std::vector<PriceSchedule>& schedules, double gamma_c, double y,
                             const std::vector<double>& trades) {
  if (schedules.size() != trades.size() || schedules.empty())
    throw DomainError("client objective needs one trade per schedule");
  double total = 0.0;
  double paid = 0.0;
  for (std::size_t k = 0; k < trades.size(); ++k) {
    total += trades[k];
    paid += schedules[k].price(trades[k]);
  }
  return y * total - paid - 0.5 * gamma_c * total * total;
}

AdmissibilityReport check_admissible(const PriceSchedule& schedule, int K, double gamma_c,
                                     std::vector<double> grid) {
  if (K < 1) throw DomainError("K must be at least 1");
  if (grid.empty()) {
    const double reach = 10.0 * schedule.n_scale();
    grid = num::linspace(-reach, reach, 2001);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::remove(grid.begin(), grid.end(), 0.0), grid.end());
  const double tilt = K == 1 ? gamma_c : 0.0;

  // Abscissa/value pairs in increasing n, with the two one-sided limits at 0.
  std::vector<std::pair<double, double>> seq;
  for (double n : grid)
    if (n < 0.0) seq.emplace_back(n, schedule.marginal(n) + tilt * n);
  seq.emplace_back(0.0, schedule.bid());
  const std::size_t gap_index = seq.size();
  seq.emplace_back(0.0, schedule.ask());
  for (double n : grid)
    if (n > 0.0) seq.emplace_back(n, schedule.marginal(n) + tilt * n);

  AdmissibilityReport report;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const bool ok = i == gap_index ? seq[i].second >= seq[i - 1].second
                                   : seq[i].second > seq[i - 1].second;
    if (!ok) {
      std::ostringstream msg;
      msg << (K == 1 ? "gamma_c*n + p(n)" : "p(n)") << " not increasing on [" << seq[i - 1].first
          << ", " << seq[i].first << "]";
      report.diagnostics = msg.str();
      report.violation_lo = seq[i - 1].first;
      report.violation_hi = seq[i].first;
      return report;
    }
  }
  if (K == 1 && !grid.empty()) {
    // The response must cover every type, so the tilted marginal keeps growing
    // well past the grid.
    const double reach = std::max(std::abs(grid.front()), std::abs(grid.back()));
    for (double far : {1e3 * reach, 1e6 * reach}) {
      const double left = schedule.marginal(-far) - gamma_c * far;
      const double right = schedule.marginal(far) + gamma_c * far;
      if (!(left < seq.front().second) || !(right > seq.back().second)) {
        report.diagnostics = "gamma_c*n + p(n) does not diverge beyond the grid";
        report.violation_lo = -far;
        report.violation_hi = far;
        return report;
      }
    }
  }
  report.admissible = true;
  return report;
}

CompatibilityReport check_compatible(const std::vector<PriceSchedule>& schedules) {
  if (schedules.empty()) throw DomainError("compatibility needs at least one schedule");
  CompatibilityReport report;
  report.ell_bar = -PriceSchedule::kInf;
  report.r_bar = PriceSchedule::kInf;
  for (const auto& s : schedules) {
    report.ell_bar = std::max(report.ell_bar, s.left_asymptote());
    report.r_bar = std::min(report.r_bar, s.right_asymptote());
  }
  report.compatible = report.ell_bar < report.r_bar;
  return report;
}

ClientResponse::ClientResponse(PriceSchedule schedule, int K, double gamma_c)
    : schedule_(std::move(schedule)), K_(K), gamma_c_(gamma_c) {
  if (K < 1) throw DomainError("K must be at least 1");
  if (!(gamma_c > 0.0)) throw DomainError("gamma_c must be positive");
}

double ClientResponse::n_of_y(double y) const {
  if (y >= a() && y <= b()) return 0.0;
  const double tilt = K_ * gamma_c_;
  const double scale = schedule_.n_scale();
  if (y < a()) {
    auto fn = [&](double n) { return n < 0.0 ? schedule_.marginal(n) + tilt * n : a(); };
    double lo = -scale;
    while (fn(lo) > y) {
      lo *= 2.0;
      if (lo < -1e15 * scale) throw SolverError("client response does not reach the type");
    }
    const auto r = num::solve_in_bracket(fn, y, lo, 0.0, 1e-13 * scale);
    if (!r.ok) throw SolverError("client response root failed");
    return r.x;
  }
  auto fn = [&](double n) { return n > 0.0 ? schedule_.marginal(n) + tilt * n : b(); };
  double hi = scale;
  while (fn(hi) < y) {
    hi *= 2.0;
    if (hi > 1e15 * scale) throw SolverError("client response does not reach the type");
  }
  const auto r = num::solve_in_bracket(fn, y, 0.0, hi, 1e-13 * scale);
  if (!r.ok) throw SolverError("client response root failed");
  return r.x;
}

ClientResponse symmetric_response(const PriceSchedule& schedule, int K, double gamma_c) {
  return ClientResponse(schedule, K, gamma_c);
}

HeterogeneousResponse heterogeneous_response(const std::vector<PriceSchedule>& schedules,
                                             double gamma_c, double y) {
  const auto compat = check_compatible(schedules);
  if (!compat.compatible) throw DomainError("schedules are not compatible");
  auto total = [&](double m) {
    double sum = m;
    for (const auto& s : schedules) sum += gamma_c * s.inverse(m);
    return sum;
  };
  double guess = y;
  double step = 1.0;
  if (std::isfinite(compat.ell_bar) && std::isfinite(compat.r_bar)) {
    guess = std::clamp(y, compat.ell_bar, compat.r_bar);
    step = 0.25 * (compat.r_bar - compat.ell_bar);
  } else if (std::isfinite(compat.ell_bar)) {
    guess = std::max(y, compat.ell_bar + 1.0);
  } else if (std::isfinite(compat.r_bar)) {
    guess = std::min(y, compat.r_bar - 1.0);
  }
  const auto r = num::solve_increasing(total, y, guess, step, 1e-13);
  if (!r.ok) throw SolverError("heterogeneous response root failed");

  HeterogeneousResponse out;
  out.marginal = r.x;
  const double edge_tol = 1e-9 * std::max(1.0, std::abs(r.x));
  out.saturated = std::abs(r.x - compat.ell_bar) < edge_tol || std::abs(r.x - compat.r_bar) < edge_tol;
  for (const auto& s : schedules) {
    double n = s.inverse(r.x);
    if (!std::isfinite(n)) {
      // Capped trade at the envelope edge.
      out.saturated = true;
      n = s.inverse(std::isinf(n) && n < 0 ? std::nextafter(compat.ell_bar, PriceSchedule::kInf)
                                           : std::nextafter(compat.r_bar, -PriceSchedule::kInf));
    }
    out.trades.push_back(n);
  }
  return out;
}

}  // namespace dealer
