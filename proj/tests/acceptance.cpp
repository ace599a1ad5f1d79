// acceptance --criterion N    (N = 1..11, or 0 for all)
// One PASS/FAIL line per check; exit status 1 when any check of the criterion fails.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dealer/client.hpp"
#include "dealer/monopoly.hpp"
#include "dealer/numerics.hpp"
#include "dealer/oligopoly.hpp"
#include "dealer/oracle.hpp"

using namespace dealer;

namespace {

class Report {
 public:
  explicit Report(int id) : id_(id) {}
  void check(bool ok, const std::string& what, const std::string& detail) {
    std::printf("%s AC%d %s: %s\n", ok ? "PASS" : "FAIL", id_, what.c_str(), detail.c_str());
    failed_ = failed_ || !ok;
  }
  void info(const std::string& what, const std::string& detail) {
    std::printf("INFO AC%d %s: %s\n", id_, what.c_str(), detail.c_str());
  }
  bool failed() const { return failed_; }

 private:
  int id_;
  bool failed_ = false;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

TypeLawPtr standard_normal() { return build_typelaw(DistributionSpec{}, 1.0); }
TypeLawPtr gaussian(double beta) { return build_typelaw(gaussian_with_beta(beta, 1.0), 1.0); }

SolverConfig window(double lo, double hi) {
  SolverConfig cfg;
  cfg.n_minus = lo;
  cfg.n_plus = hi;
  return cfg;
}

PriceSchedule linear(double slope, double bid, double ask) {
  return PriceSchedule::from_function([=](double n) { return (n < 0.0 ? bid : ask) + slope * n; }, bid, ask,
                                      -PriceSchedule::kInf, PriceSchedule::kInf,
                                      [=](double) { return slope; });
}

// Smallest beta in [lo, hi] where pred holds, pred monotone in beta.
double bisect(const std::function<bool(double)>& pred, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

void ac1(Report& r) {
  Stopwatch clock;
  auto convex = [](double beta) {
    const auto law = gaussian(beta);
    const auto [lo, hi] = monopoly_spread_roots(*law);
    return monopoly_convexity_check(*law, 1.0, 0.0, lo, hi).convex;
  };
  const double flip = bisect(convex, 0.2, 0.5, 1e-7);
  const double formula = 1.0 - num::mills_lower(-1.0);
  const double t = clock.seconds();
  r.check(std::abs(flip - formula) < 5e-4, "flip matches 1 - Phi(-1)/phi(-1)",
          fmt("flip %.7f, formula %.7f", flip, formula));
  r.check(std::abs(flip - 0.3422) < 5e-4, "flip within 5e-4 of 0.3422",
          fmt("flip %.7f, |diff| %.2e", flip, std::abs(flip - 0.3422)));
  r.check(t < 10.0, "runtime under 10 s", fmt("%.2f s", t));
}

void ac2(Report& r) {
  for (int i = 1; i <= 9; ++i) {
    const double beta = 0.1 * i;
    const auto z = z_mon_threshold(beta, 1.0, 0.0, std::sqrt(2.0));
    r.check(z.z == -1.0, fmt("z_mon(%.1f) == -1", beta), fmt("%.17g", z.z));
  }
}

void ac3(Report& r) {
  const double sigma_Y = std::sqrt(2.0);
  const auto at = gaussian_oli_bound(0.5, 1.0, 0.0, sigma_Y);
  const auto below = gaussian_oli_bound(0.499, 1.0, 0.0, sigma_Y);
  r.check(at.passes, "beta = 0.5 passes", fmt("z %.17g", at.z));
  r.check(!below.passes, "beta = 0.499 fails", fmt("z %.17g", below.z));
  bool reduces = true;
  for (double beta : num::linspace(0.05, 0.95, 91))
    reduces = reduces && gaussian_oli_bound(beta, 1.0, 0.0, sigma_Y).passes == (beta >= 0.5);
  r.check(reduces, "bound equals beta >= 1/2 on a 91-point grid", "");

  // exploratory: where f_oli starts to hold for two dealers
  auto f_oli = [](double beta) {
    const auto law = gaussian(beta);
    const auto sol = solve_equilibrium_ode(law, 2, 1.0, 0.0);
    return verify_f_oli(*law, 1.0, 0.0, sol.bid, sol.ask).pass;
  };
  const double flip = bisect(f_oli, 0.4, 0.5, 1e-4);
  r.info("K = 2 f_oli flip (recorded only)",
         fmt("%.4f, reported 0.465, %s +-0.01", flip, std::abs(flip - 0.465) <= 0.01 ? "within" : "outside"));
}

void ac4(Report& r) {
  Stopwatch clock;
  const auto sol = solve_equilibrium_ode(standard_normal(), 2, 1.0, 0.0, window(-3.0, 3.0));
  const double t = clock.seconds();
  r.check(sol.gap_at_zero < 1e-4, "gap at 0 below 1e-4", fmt("%.3e", sol.gap_at_zero));
  r.check(sol.containment_ok, "corridor containment at every accepted step",
          fmt("worst violation %.3e over %d steps", sol.worst_containment, sol.accepted_steps));
  r.check(t < 30.0, "runtime under 30 s", fmt("%.2f s", t));
}

void ac5(Report& r) {
  const auto law = standard_normal();
  const auto base = monopoly_schedule(law, 1.0, 0.0).schedule;
  for (double gd : {0.5, 2.0}) {
    const auto s = monopoly_schedule(law, 1.0, gd).schedule;
    const double rb = std::abs(s.bid() - base.bid()) / std::abs(base.bid());
    const double ra = std::abs(s.ask() - base.ask()) / std::abs(base.ask());
    r.check(rb < 1e-10 && ra < 1e-10, fmt("p(0-), p(0+) at gamma_d = %g", gd),
            fmt("bid %.17g ask %.17g, rel %.1e / %.1e", s.bid(), s.ask(), rb, ra));
  }
}

void ac6(Report& r) {
  const auto law = standard_normal();
  const double mono = monopoly_schedule(law, 1.0, 0.0).schedule.spread();
  const auto s0 = solve_equilibrium_ode(law, 2, 1.0, 0.0);
  const auto s4 = solve_equilibrium_ode(law, 2, 1.0, 0.4);
  r.check(s0.ask - s0.bid < mono, "duopoly spread below monopoly spread",
          fmt("%.10f < %.10f", s0.ask - s0.bid, mono));
  r.check(s4.ask - s4.bid > s0.ask - s0.bid, "duopoly spread grows with gamma_d",
          fmt("%.10f (0.4) > %.10f (0)", s4.ask - s4.bid, s0.ask - s0.bid));
}

void ac7(Report& r) {
  const auto ys = num::linspace(-5.0, 5.0, 41);
  const double step = 1e-3;
  const double reach = 4.0;
  struct Fixture {
    std::string name;
    std::vector<PriceSchedule> schedules;
    bool symmetric;
  };
  const auto law = standard_normal();
  const auto mono = monopoly_schedule(law, 1.0, 0.0).schedule;
  const auto eq = solve_equilibrium_ode(law, 2, 1.0, 0.0).p_star;
  const auto q1 = linear(1.0, -0.5, 0.5);
  const auto q2 = linear(2.0, -0.7, 0.4);
  const std::vector<Fixture> fixtures = {{"monopoly closed form", {mono}, true},
                                         {"duopoly equilibrium", {eq, eq}, true},
                                         {"synthetic quadratic", {q1, q1}, true},
                                         {"synthetic quadratic pair", {q1, q2}, false}};
  for (const auto& f : fixtures) {
    const ClientGridOracle grid(f.schedules, 1.0, reach, step);
    const int K = static_cast<int>(f.schedules.size());
    const ClientResponse sym(f.schedules.front(), K, 1.0);
    double worst_sym = 0.0;
    double worst_het = 0.0;
    bool boundary = false;
    for (double y : ys) {
      const auto g = grid.argmax(y);
      boundary = boundary || g.on_boundary;
      const auto het = heterogeneous_response(f.schedules, 1.0, y);
      for (int k = 0; k < K; ++k) {
        worst_het = std::max(worst_het, std::abs(het.trades[k] - g.trades[k]));
        if (f.symmetric) worst_sym = std::max(worst_sym, std::abs(sym.n_of_y(y) - g.trades[k]));
      }
    }
    if (f.symmetric)
      r.check(worst_sym <= 1e-3 && !boundary, f.name + ": symmetric response vs grid",
              fmt("max |dn| %.2e on 41 y-points", worst_sym));
    r.check(worst_het <= 1e-3 && !boundary, f.name + ": heterogeneous response vs grid",
            fmt("max |dn| %.2e on 41 y-points", worst_het));
  }
}

void ac8(Report& r) {
  constexpr double pi = std::numbers::pi;
  auto arctan = [](double shift) {
    return PriceSchedule::from_function([=](double n) { return std::atan(n) + shift; }, shift, shift,
                                        -pi / 2 + shift, pi / 2 + shift,
                                        [](double n) { return 1.0 / (1.0 + n * n); });
  };
  const auto a = arctan(0.0);
  const auto b = arctan(pi);
  r.check(check_admissible(a, 2, 1.0).admissible, "arctan admissible for K = 2", "");
  r.check(check_admissible(b, 2, 1.0).admissible, "arctan + pi admissible for K = 2", "");
  const auto c = check_compatible({a, b});
  r.check(!c.compatible, "pair flagged incompatible", fmt("ell_bar %.6f, r_bar %.6f", c.ell_bar, c.r_bar));
}

void ac9(Report& r) {
  const auto g = standard_normal();
  const auto rg = efron_check(*g, num::linspace(-6.0, 6.0, 201), 0.01);
  r.check(rg.pass, "gaussian g' in (0.01, 0.99)", fmt("[%.6f, %.6f]", rg.min_slope, rg.max_slope));
  r.check(std::abs(rg.min_slope - 0.5) < 1e-8 && std::abs(rg.max_slope - 0.5) < 1e-8,
          "gaussian g' equals beta", "beta 0.5");
  DistributionSpec s;
  s.family = Family::two_sided_exponential;
  // unequal scales; with equal ones g(y) = y/2 by symmetry
  s.sigma_M = 0.6;
  const auto lap = build_typelaw(s, 1.0);
  const auto rl = efron_check(*lap, num::linspace(-6.0, 6.0, 201), 0.01);
  r.check(rl.pass, "two-sided exponential g' in (0.01, 0.99)", fmt("[%.6f, %.6f]", rl.min_slope, rl.max_slope));
}

void ac10(Report& r) {
  Stopwatch clock;
  const auto law = gaussian(0.55);
  const auto sol = solve_equilibrium_ode(law, 2, 1.0, 0.0);
  const auto& p = sol.p_star;
  const auto devs = random_deviations(p, 20, 20240611, 1.0);
  r.check(devs.size() == 20, "20 admissible deviations drawn", fmt("%zu", devs.size()));
  double worst = -PriceSchedule::kInf;
  double J_base = 0.0;
  for (const auto& d : devs) {
    const auto o = dealer_profit_deviation(*law, 2, 1.0, 0.0, p, d);
    J_base = o.J_base;
    worst = std::max(worst, o.J_dev - o.J_base);
  }
  r.check(worst <= 1e-6, "J_dev <= J_base + 1e-6", fmt("J_base %.10f, max gain %.3e", J_base, worst));
  const auto n_grid = num::linspace(0.95 * sol.n_minus, 0.95 * sol.n_plus, 21);
  const auto x_grid = num::linspace(sol.n_minus, sol.n_plus, 41);
  const auto pw = pointwise_optimality_check(*law, 2, 1.0, 0.0, p, n_grid, x_grid);
  const bool covered = pw.case_beyond > 0 && pw.case_between > 0 && pw.case_zero > 0 && pw.case_opposite > 0;
  r.check(pw.pass && covered, "pointwise eta inequality",
          fmt("worst excess %.3e; cases %d/%d/%d/%d", pw.worst_excess, pw.case_beyond, pw.case_between,
              pw.case_zero, pw.case_opposite));
  const double t = clock.seconds();
  r.check(t < 120.0, "runtime under 2 min", fmt("%.2f s", t));
}

void ac11(Report& r) {
  const auto law = standard_normal();
  double worst_x = 0.0;
  double worst_z = 0.0;
  int points = 0;
  for (double gd : {0.0, 0.4}) {
    const EtaFunctions eta(*law, 2, 1.0, gd);
    for (double n : num::linspace(-2.0, 2.0, 10)) {
      for (double x : num::linspace(-1.5, 1.5, 10)) {
        for (double z : {-1.0, 0.2, 1.4}) {
          const double h = 1e-5;
          const double fx = (eta.eta_minus(n, x + h, z) - eta.eta_minus(n, x - h, z)) / (2 * h);
          const double fz = (eta.eta_minus(n, x, z + h) - eta.eta_minus(n, x, z - h)) / (2 * h);
          const double ax = eta.d_eta_dx(n, x, z);
          const double az = eta.d_eta_dz(n, x, z, -1);
          worst_x = std::max(worst_x, std::abs(ax - fx) / std::max(std::abs(ax), 1e-3));
          worst_z = std::max(worst_z, std::abs(az - fz) / std::max(std::abs(az), 1e-3));
          ++points;
        }
      }
    }
  }
  r.check(worst_x <= 1e-5, "d eta_- / dx", fmt("max rel err %.2e on %d points", worst_x, points));
  r.check(worst_z <= 1e-5, "d eta_- / dz", fmt("max rel err %.2e on %d points", worst_z, points));
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  CLI::App app{"acceptance checks"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "1..11, 0 for all")->check(CLI::Range(0, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<void (*)(Report&)> all = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11};
  bool failed = false;
  for (int i = 1; i <= 11; ++i) {
    if (criterion != 0 && criterion != i) continue;
    Report r(i);
    try {
      all[i - 1](r);
    } catch (const std::exception& e) {
      r.check(false, "completed", e.what());
    }
    failed = failed || r.failed();
  }
  return failed ? 1 : 0;
}
