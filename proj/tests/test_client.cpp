#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dealer/client.hpp"
#include "dealer/monopoly.hpp"
#include "dealer/numerics.hpp"
#include "dealer/oligopoly.hpp"
#include "dealer/oracle.hpp"

using namespace dealer;

namespace {

constexpr double kPi = std::numbers::pi;

PriceSchedule linear(double slope, double bid = 0.0, double ask = 0.0) {
  return PriceSchedule::from_function(
      [=](double n) { return (n < 0.0 ? bid : ask) + slope * n; }, bid, ask, -PriceSchedule::kInf,
      PriceSchedule::kInf, [=](double) { return slope; });
}

PriceSchedule arctan(double shift) {
  return PriceSchedule::from_function([=](double n) { return std::atan(n) + shift; }, shift, shift,
                                      -kPi / 2 + shift, kPi / 2 + shift,
                                      [](double n) { return 1.0 / (1.0 + n * n); });
}

}  // namespace

TEST_CASE("client objective") {
  const auto quad = linear(2.0);  // P(n) = n^2
  CHECK(eval_client_objective({quad}, 1.0, 3.0, {1.0}) == doctest::Approx(1.5));
  CHECK(eval_client_objective({quad, arctan(0.3)}, 1.0, 2.0, {0.0, 0.0}) == 0.0);
  CHECK_THROWS_AS(eval_client_objective({quad}, 1.0, 0.0, {1.0, 2.0}), DomainError);
}

TEST_CASE("admissibility") {
  CHECK(check_admissible(arctan(0.0), 1, 1.0).admissible);
  CHECK(check_admissible(arctan(0.0), 2, 1.0).admissible);
  const auto concave = PriceSchedule::from_function([](double n) { return std::atan(n) - 2.0 * n; }, 0.0, 0.0);
  const auto r = check_admissible(concave, 2, 1.0);
  CHECK_FALSE(r.admissible);
  CHECK_FALSE(r.diagnostics.empty());
  CHECK(r.violation_lo < r.violation_hi);
  // K = 1 only needs gamma_c n + p(n) increasing and unbounded
  const auto mildly_concave =
      PriceSchedule::from_function([](double n) { return std::atan(n) - 0.5 * n; }, 0.0, 0.0);
  CHECK(check_admissible(mildly_concave, 1, 1.0).admissible);
  CHECK_FALSE(check_admissible(mildly_concave, 2, 1.0).admissible);
}

TEST_CASE("nonconvex monopoly schedule is admissible only for one dealer") {
  const auto law = build_typelaw(gaussian_with_beta(0.25, 1.0), 1.0);
  const auto mono = monopoly_schedule(law, 1.0, 0.0);
  CHECK_FALSE(mono.convex);
  CHECK(check_admissible(mono.schedule, 1, 1.0).admissible);
  CHECK_FALSE(check_admissible(mono.schedule, 2, 1.0).admissible);
}

TEST_CASE("compatibility") {
  const auto r = check_compatible({arctan(0.0), arctan(kPi)});
  CHECK_FALSE(r.compatible);
  CHECK(r.ell_bar == doctest::Approx(kPi / 2));
  CHECK(r.r_bar == doctest::Approx(kPi / 2));
  CHECK(check_compatible({linear(1.0), linear(2.0)}).compatible);
  CHECK(check_compatible({arctan(0.0), arctan(1.0)}).compatible);
  CHECK_THROWS_AS(heterogeneous_response({arctan(0.0), arctan(kPi)}, 1.0, 0.0), DomainError);
}

TEST_CASE("symmetric response basics") {
  const ClientResponse lin(linear(1.0), 1, 1.0);
  CHECK(lin.n_of_y(4.0) == doctest::Approx(2.0).epsilon(1e-12));
  const ClientResponse gap(linear(1.0, -1.0, 1.0), 2, 1.0);
  CHECK(gap.a() == -1.0);
  CHECK(gap.b() == 1.0);
  for (double y : {-1.0, -0.3, 0.0, 0.9, 1.0}) CHECK(gap.n_of_y(y) == 0.0);
  CHECK(gap.n_of_y(1.0 + 1e-9) > 0.0);
  CHECK(gap.n_of_y(-1.0 - 1e-9) < 0.0);
}

TEST_CASE("response is monotone with a small FOC residual") {
  const auto law = build_typelaw(DistributionSpec{}, 1.0);
  const auto sol = solve_equilibrium_ode(law, 2, 1.0, 0.0);
  const auto resp = symmetric_response(sol.p_star, 2, 1.0);
  double prev = -PriceSchedule::kInf;
  for (double y : num::linspace(-8.0, 8.0, 161)) {
    const double n = resp.n_of_y(y);
    CHECK(n >= prev);
    prev = n;
    if (n != 0.0) CHECK(std::abs(y - sol.p_star.marginal(n) - 2.0 * n) < 1e-8);
    else CHECK((y >= resp.a() && y <= resp.b()));
  }
  CHECK(resp.n_of_y(-1e3) < -100.0);
  CHECK(resp.n_of_y(1e3) > 100.0);
}

TEST_CASE("heterogeneous response") {
  const auto s = linear(1.0, -0.5, 0.5);
  const auto het = heterogeneous_response({s, s}, 1.0, 3.0);
  const ClientResponse sym(s, 2, 1.0);
  CHECK(het.trades[0] == doctest::Approx(sym.n_of_y(3.0)).epsilon(1e-10));
  CHECK(het.trades[1] == doctest::Approx(het.trades[0]).epsilon(1e-12));
  CHECK_FALSE(het.saturated);
  const auto none = heterogeneous_response({s, linear(2.0, -0.7, 0.4)}, 1.0, 0.1);
  CHECK(none.trades[0] == 0.0);
  CHECK(none.trades[1] == 0.0);
}

TEST_CASE("heterogeneous response matches a 2-d grid search") {
  const auto s1 = linear(1.0, -0.5, 0.5);
  const auto s2 = PriceSchedule::from_function(
      [](double n) { return std::atan(n) + 0.5 * n + (n < 0.0 ? -0.1 : 0.5); }, -0.1, 0.5,
      -PriceSchedule::kInf, PriceSchedule::kInf, [](double n) { return 1.0 / (1.0 + n * n) + 0.5; });
  REQUIRE(check_admissible(s2, 2, 1.0).admissible);
  const double y = 3.0;
  const auto het = heterogeneous_response({s1, s2}, 1.0, y);
  const auto grid = client_grid_oracle({s1, s2}, 1.0, y, 4.0, 1e-3);
  CHECK_FALSE(grid.on_boundary);
  CHECK(std::abs(grid.trades[0] - het.trades[0]) <= 1e-3);
  CHECK(std::abs(grid.trades[1] - het.trades[1]) <= 1e-3);
}

TEST_CASE("large types against a finite envelope") {
  // the marginal approaches the tighter asymptote while trades stay finite
  const auto r = heterogeneous_response({arctan(0.0), arctan(1.0)}, 1.0, 50.0);
  CHECK(r.marginal < kPi / 2);
  CHECK(r.marginal > kPi / 2 - 0.1);
  CHECK(std::isfinite(r.trades[0]));
  CHECK(std::isfinite(r.trades[1]));
  CHECK(r.trades[0] > r.trades[1]);
  CHECK(r.marginal + r.trades[0] + r.trades[1] == doctest::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("compatibility of a shifted equilibrium") {
  const auto law = build_typelaw(DistributionSpec{}, 1.0);
  const auto sol = solve_equilibrium_ode(law, 2, 1.0, 0.0);
  const double quarter = 0.25 * sol.p_star.spread();
  const auto shifted = apply_deviation(sol.p_star, {Perturbation::marginal_shift, quarter});
  CHECK(check_compatible({sol.p_star, shifted}).compatible);
}

TEST_CASE("symmetric response matches the grid oracle") {
  const auto law = build_typelaw(DistributionSpec{}, 1.0);
  const auto mono = monopoly_schedule(law, 1.0, 0.0);
  const ClientResponse resp(mono.schedule, 1, 1.0);
  const ClientGridOracle grid({mono.schedule}, 1.0, 5.0, 1e-3);
  for (double y : num::linspace(-5.0, 5.0, 41)) {
    const auto g = grid.argmax(y);
    CHECK_FALSE(g.on_boundary);
    CHECK(std::abs(g.trades[0] - resp.n_of_y(y)) <= 1e-3);
  }
}
