#include "dealer/oligopoly.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dealer/numerics.hpp"

namespace dealer {

namespace {

double invert(const std::function<double(double)>& fn, double target, double guess, double scale,
              const char* what) {
  const auto r = num::solve_increasing(fn, target, guess, scale, 1e-13 * scale);
  if (!r.ok) throw SolverError(std::string("envelope inversion failed: ") + what);
  return r.x;
}

}  // namespace

OdeCoefficients::OdeCoefficients(TypeLawPtr law, int K, double gamma_c, double gamma_d)
    : law_(std::move(law)), K_(K), gamma_c_(gamma_c), gamma_d_(gamma_d) {
  if (!law_) throw DomainError("missing type law");
  if (K < 2) throw DomainError("the equilibrium ODE needs K >= 2");
  if (!(gamma_c > 0.0)) throw DomainError("gamma_c must be positive");
  if (!(gamma_d >= 0.0)) throw DomainError("gamma_d must be nonnegative");
  alpha_ = gamma_d + K * gamma_c;
}

double OdeCoefficients::a_map(double y) const { return y - law_->cond_mean(y); }
double OdeCoefficients::bm_map(double y) const {
  return y + law_->hazard_minus(y) - law_->cond_mean(y);
}
double OdeCoefficients::bp_map(double y) const {
  return y - law_->hazard_plus(y) - law_->cond_mean(y);
}

double OdeCoefficients::A(double n, double z) const {
  return alpha_ * n - a_map(z + K_ * gamma_c_ * n);
}
double OdeCoefficients::B_minus(double n, double z) const {
  return -alpha_ * n + bm_map(z + K_ * gamma_c_ * n);
}
double OdeCoefficients::B_plus(double n, double z) const {
  return -alpha_ * n + bp_map(z + K_ * gamma_c_ * n);
}

double OdeCoefficients::rhs(double n, double z, int side) const {
  const double denom = side < 0 ? B_minus(n, z) : B_plus(n, z);
  if (!(std::abs(denom) >= 1e-12)) throw SolverError("ODE denominator vanishes (left the corridor)");
  return (K_ - 1) * gamma_c_ * A(n, z) / denom;
}

double OdeCoefficients::rhs(double n, double z) const {
  if (n == 0.0) throw DomainError("ODE right-hand side at n = 0 needs an explicit side");
  return rhs(n, z, n < 0.0 ? -1 : 1);
}

void OdeCoefficients::estimate_bounds(double y_lo, double y_hi, int points) {
  const TypeLaw& law = *law_;
  const double y0 = invert([this](double y) { return a_map(y); }, 0.0, law.mean(), law.scale(),
                           "root of id - g");
  auto grid = num::linspace(std::min(y_lo, y0), std::max(y_hi, y0), static_cast<std::size_t>(points));
  grid.push_back(y0);
  if (law.beta()) {
    delta = C_g = 1.0 - *law.beta();
  } else {
    delta = PriceSchedule::kInf;
    C_g = -PriceSchedule::kInf;
    for (double y : grid) {
      const double s = 1.0 - law.cond_mean_slope(y);
      delta = std::min(delta, s);
      C_g = std::max(C_g, s);
    }
  }
  // On the bid side the corridor only reaches types below (id - g)^{-1}(0);
  // on the ask side only types above it.
  C_f = -PriceSchedule::kInf;
  for (double y : grid) {
    const double gs = law.cond_mean_slope(y);
    if (y <= y0) C_f = std::max(C_f, 1.0 + law.hazard_minus_slope(y) - gs);
    if (y >= y0) C_f = std::max(C_f, 1.0 - law.hazard_plus_slope(y) - gs);
  }
  if (!(delta > 0.0) || !(C_f >= delta))
    throw DomainError("derivative bounds for the ODE are degenerate on the window");
}

EnvelopePair envelopes(const OdeCoefficients& coef, double n, int side) {
  const TypeLaw& law = coef.law();
  const double t = coef.alpha() * n;
  const double shift = coef.K() * coef.gamma_c() * n;
  const double scale = law.scale();
  EnvelopePair out;
  out.w = invert([&](double y) { return coef.a_map(y); }, t, law.mean(), scale, "A root") - shift;
  if (side < 0)
    out.v = invert([&](double y) { return coef.bm_map(y); }, t, out.w + shift, scale, "B_- root") - shift;
  else
    out.v = invert([&](double y) { return coef.bp_map(y); }, t, out.w + shift, scale, "B_+ root") - shift;
  return out;
}

Epsilons choose_epsilons(const OdeCoefficients& coef) {
  const double K = coef.K();
  const double gc = coef.gamma_c();
  const double alpha = coef.alpha();
  const double delta = coef.delta;
  const double C_g = coef.C_g;
  const double C_f = coef.C_f;
  if (!(delta > 0.0 && C_g > 0.0 && C_f > 0.0) || !std::isfinite(C_f))
    throw DomainError("derivative bounds must be positive and finite");
  if (!(C_g < alpha / (K * gc))) throw DomainError("C_g violates the growth condition on g");

  Epsilons eps;
  const double a = alpha / delta - K * gc;
  const double c = (K - 1.0) * gc * delta / C_f;
  if (!(a > 0.0)) throw DomainError("no admissible eps_v");
  eps.eps_v = c / (a + c);

  const double d = (K - 1.0) * gc * C_g / delta;
  const double qa = alpha / C_g - alpha / C_f;
  const double qb = -2.0 * alpha / C_g + alpha / C_f + K * gc - d;
  const double qc = alpha / C_g - K * gc;
  std::vector<double> roots;
  if (std::abs(qa) < 1e-14 * std::max({std::abs(qb), std::abs(qc), 1.0})) {
    roots.push_back(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      // Stable quadratic formula.
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      roots.push_back(q / qa);
      if (q != 0.0) roots.push_back(qc / q);
    }
  }
  double best = PriceSchedule::kInf;
  for (double r : roots)
    if (r > 0.0 && r < 1.0) best = std::min(best, r);
  if (!std::isfinite(best)) throw DomainError("no admissible eps_w in (0, 1)");
  eps.eps_w = best;
  if (!(eps.eps_v + eps.eps_w < 1.0)) throw DomainError("eps_v + eps_w must be below 1");
  return eps;
}

namespace {

using State = std::array<double, 1>;

// Integrates one trajectory on `t_grid` (increasing, ending at 0). The ODE is
// posed in t, with n = sign * t, so both sides run forward in t.
class SideIntegrator {
 public:
  SideIntegrator(const OdeCoefficients& coef, int side, const Epsilons& eps, const SolverConfig& cfg,
                 SandwichSolution& sol)
      : coef_(coef), side_(side), eps_(eps), cfg_(cfg), sol_(sol) {}

  double n_of(double t) const { return side_ < 0 ? t : -t; }

  // Raw corridor (lower, upper) and the blended bounds at parameter t.
  void bounds(double t, double& raw_lo, double& raw_hi, double& lo, double& hi) const {
    const auto env = envelopes(coef_, n_of(t), side_);
    const double v_eps = (1.0 - eps_.eps_v) * env.v + eps_.eps_v * env.w;
    const double w_eps = (1.0 - eps_.eps_w) * env.w + eps_.eps_w * env.v;
    if (side_ < 0) {
      raw_lo = env.v;
      raw_hi = env.w;
      lo = v_eps;
      hi = w_eps;
    } else {
      raw_lo = env.w;
      raw_hi = env.v;
      lo = w_eps;
      hi = v_eps;
    }
  }

  std::vector<double> run(const std::vector<double>& t_grid, double z0) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(cfg_.abs_tol, cfg_.rel_tol,
                                           odeint::runge_kutta_dopri5<State>());
    auto system = [this](const State& x, State& dxdt, double t) {
      const double n = n_of(t);
      const double r = coef_.rhs(n, x[0], side_);
      dxdt[0] = side_ < 0 ? r : -r;
    };
    std::vector<double> out{z0};
    State x{z0};
    double t = t_grid.front();
    const double span = std::abs(t_grid.front());
    const double max_step = span / 200.0;
    double dt = std::min(max_step, t_grid[1] - t_grid[0]);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      const double target = t_grid[i];
      while (t < target) {
        dt = std::min({dt, max_step, target - t});
        const State saved = x;
        const double t_saved = t;
        const double dt_try = dt;
        bool accepted = false;
        try {
          accepted = stepper.try_step(system, x, t, dt) == odeint::success;
        } catch (const SolverError&) {
          x = saved;
          t = t_saved;
          dt = 0.5 * dt_try;
          stepper.reset();
        }
        if (!accepted) {
          ++sol_.rejected_steps;
          if (dt < 1e-14 * span) throw SolverError("ODE step size underflow; trajectory leaves the corridor");
          continue;
        }
        if (std::abs(target - t) < 1e-12 * span) t = target;
        double raw_lo, raw_hi, lo, hi;
        bounds(t, raw_lo, raw_hi, lo, hi);
        if (!(x[0] > raw_lo && x[0] < raw_hi)) {
          x = saved;
          t = t_saved;
          dt = 0.5 * dt_try;
          stepper.reset();
          ++sol_.rejected_steps;
          if (dt < 1e-14 * span) throw SolverError("trajectory persistently exits the corridor");
          continue;
        }
        ++sol_.accepted_steps;
        const double violation = std::max(lo - x[0], x[0] - hi);
        sol_.worst_containment = std::max(sol_.worst_containment, violation);
        if (violation > cfg_.containment_tol) sol_.containment_ok = false;
      }
      out.push_back(x[0]);
    }
    return out;
  }

 private:
  const OdeCoefficients& coef_;
  int side_;
  Epsilons eps_;
  const SolverConfig& cfg_;
  SandwichSolution& sol_;
};

}  // namespace

SandwichSolution solve_equilibrium_ode(const TypeLawPtr& law, int K, double gamma_c,
                                       double gamma_d, const SolverConfig& cfg) {
  OdeCoefficients coef(law, K, gamma_c, gamma_d);
  const double sigma = law->scale();
  SandwichSolution sol;
  sol.n_minus = std::isnan(cfg.n_minus) ? -5.0 * sigma / (gamma_c * K) : cfg.n_minus;
  sol.n_plus = std::isnan(cfg.n_plus) ? 5.0 * sigma / (gamma_c * K) : cfg.n_plus;
  if (!(sol.n_minus < 0.0 && sol.n_plus > 0.0)) throw DomainError("window needs n_minus < 0 < n_plus");
  if (cfg.grid_points < 3) throw DomainError("grid_points must be at least 3");

  const double shift = K * gamma_c;
  const double y_lo = envelopes(coef, sol.n_minus, -1).v + shift * sol.n_minus - 5.0 * sigma;
  const double y_hi = envelopes(coef, sol.n_plus, 1).v + shift * sol.n_plus + 5.0 * sigma;
  coef.estimate_bounds(y_lo, y_hi);
  sol.delta = coef.delta;
  sol.C_g = coef.C_g;
  sol.C_f = coef.C_f;
  sol.eps = choose_epsilons(coef);

  const bool competitive =
      cfg.use_competitive_bound && law->beta().has_value() && gamma_d == 0.0;
  if (cfg.use_competitive_bound && !competitive)
    sol.warnings.push_back("competitive bound needs a Gaussian law and gamma_d = 0; ignored");

  for (int side : {-1, 1}) {
    SandwichSide& out = side < 0 ? sol.negative : sol.positive;
    const double t0 = side < 0 ? sol.n_minus : -sol.n_plus;
    const auto t_grid = num::linspace(t0, 0.0, static_cast<std::size_t>(cfg.grid_points));
    SideIntegrator integ(coef, side, sol.eps, cfg, sol);
    double raw_lo, raw_hi, lo, hi;
    integ.bounds(t0, raw_lo, raw_hi, lo, hi);
    double start_lo = lo;
    double start_hi = hi;
    if (competitive) {
      const double u = competitive_upper_solution(*law, K, gamma_c, integ.n_of(t0), side);
      if (side < 0 && u > lo && u < hi) start_hi = u;
      if (side > 0 && u > lo && u < hi) start_lo = u;
    }
    out.lower = integ.run(t_grid, start_lo);
    out.upper = integ.run(t_grid, start_hi);
    for (double t : t_grid) {
      const double n = integ.n_of(t);
      out.n.push_back(n);
      const auto env = envelopes(coef, n, side);
      out.v.push_back(env.v);
      out.w.push_back(env.w);
      out.v_eps.push_back((1.0 - sol.eps.eps_v) * env.v + sol.eps.eps_v * env.w);
      out.w_eps.push_back((1.0 - sol.eps.eps_w) * env.w + sol.eps.eps_w * env.v);
    }
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double mid = 0.5 * (out.lower[i] + out.upper[i]);
      out.midpoint.push_back(mid);
      out.slope.push_back(coef.rhs(out.n[i], mid, side));
    }
    out.gap_at_zero = out.upper.back() - out.lower.back();
    if (out.gap_at_zero < 0.0) {
      std::ostringstream msg;
      msg << (side < 0 ? "bid" : "ask") << "-side runs crossed at 0 by " << -out.gap_at_zero
          << "; gap clamped to 0";
      sol.warnings.push_back(msg.str());
      out.gap_at_zero = 0.0;
    }
  }
  sol.gap_at_zero = std::max(sol.negative.gap_at_zero, sol.positive.gap_at_zero);

  sol.bid = sol.negative.midpoint.back();
  sol.ask = sol.positive.midpoint.back();
  if (sol.bid > sol.ask) {
    std::ostringstream msg;
    msg << "bid exceeded ask by " << sol.bid - sol.ask << "; both set to their average";
    sol.warnings.push_back(msg.str());
    const double mid = 0.5 * (sol.bid + sol.ask);
    sol.bid = sol.ask = mid;
    sol.negative.midpoint.back() = mid;
    sol.positive.midpoint.back() = mid;
  }

  std::vector<double> pos_n(sol.positive.n.rbegin(), sol.positive.n.rend());
  std::vector<double> pos_p(sol.positive.midpoint.rbegin(), sol.positive.midpoint.rend());
  std::vector<double> pos_s(sol.positive.slope.rbegin(), sol.positive.slope.rend());
  sol.p_star = PriceSchedule::from_samples(sol.negative.n, sol.negative.midpoint, std::move(pos_n),
                                           std::move(pos_p), sol.negative.slope, std::move(pos_s));
  return sol;
}

FOliReport verify_f_oli(const TypeLaw& law, double gamma_c, double gamma_d, double bid, double ask,
                        double tol) {
  FOliReport report;
  report.bound = gamma_d / gamma_c;
  const double reach = 12.0 * law.scale();
  report.sup_minus = -PriceSchedule::kInf;
  for (double y : num::linspace(bid - reach, bid, 2001))
    report.sup_minus = std::max(report.sup_minus, law.hazard_minus_slope(y) - law.cond_mean_slope(y));
  report.sup_plus = -PriceSchedule::kInf;
  for (double y : num::linspace(ask, ask + reach, 2001))
    report.sup_plus = std::max(report.sup_plus, -law.hazard_plus_slope(y) - law.cond_mean_slope(y));
  report.margin = report.bound - std::max(report.sup_minus, report.sup_plus);
  report.pass = report.margin >= -tol;
  return report;
}

EquilibriumCertificate certify_equilibrium(const TypeLaw& law, int K, double gamma_c,
                                           double gamma_d, const SandwichSolution& sol) {
  (void)K;
  EquilibriumCertificate cert;
  cert.f_oli = verify_f_oli(law, gamma_c, gamma_d, sol.bid, sol.ask);
  if (law.beta() && gamma_d == 0.0)
    cert.gaussian_beta_bound = gaussian_oli_bound(*law.beta(), gamma_c, law.spec().mu_M, law.scale());
  cert.spread = sol.ask - sol.bid;
  return cert;
}

ThresholdResult gaussian_oli_bound(double beta, double gamma_c, double mu_M, double sigma_Y) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
  const double c = gamma_c * std::abs(mu_M) / sigma_Y;
  ThresholdResult out;
  if (beta < 0.5) {
    out.z = std::numeric_limits<double>::quiet_NaN();
    out.passes = false;
    return out;
  }
  if (beta == 0.5) {
    out.z = c > 0.0 ? -PriceSchedule::kInf : 0.0;
    out.passes = c * c < std::numbers::pi / 2.0;
    return out;
  }
  out.z = -(1.0 - beta) / (2.0 * beta - 1.0) * c;
  out.passes = c * c < std::numbers::pi / 2.0 && beta >= 0.5 + 0.5 * c * num::mills_lower(out.z);
  return out;
}

double competitive_upper_solution(const TypeLaw& law, int K, double gamma_c, double n, int side) {
  if (!law.beta()) throw DomainError("the competitive schedule is only available for Gaussian laws");
  const double beta = *law.beta();
  const double var = law.scale() * law.scale();
  const double level = law.mean() + gamma_c * law.spec().mu_M;
  const double target = gamma_c * K * n;
  const bool bid_side = n < 0.0 || (n == 0.0 && side < 0);
  std::function<double(double)> h;
  if (bid_side)
    h = [&](double y) { return y - level + beta * var / law.hazard_minus(y); };
  else
    h = [&](double y) { return y - level - beta * var / law.hazard_plus(y); };
  return invert(h, target, law.mean(), law.scale(), "competitive schedule") - target;
}

}  // namespace dealer
