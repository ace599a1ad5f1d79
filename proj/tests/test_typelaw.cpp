#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dealer/numerics.hpp"
#include "dealer/typelaw.hpp"

using namespace dealer;

namespace {

TypeLawPtr base_gaussian() { return build_typelaw(DistributionSpec{}, 1.0); }

DistributionSpec laplace_spec() {
  DistributionSpec s;
  s.family = Family::two_sided_exponential;
  // unit rates: standard deviation sqrt(2)
  s.sigma_S = std::numbers::sqrt2;
  s.sigma_M = std::numbers::sqrt2;
  return s;
}

double laplace_pdf(double x) { return 0.5 * std::exp(-std::abs(x)); }

}  // namespace

TEST_CASE("gaussian base case projection") {
  const auto law = base_gaussian();
  REQUIRE(law->beta().has_value());
  CHECK(*law->beta() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law->mean() == 0.0);
  CHECK(law->scale() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  for (double y : {-3.0, -0.7, 0.0, 1.3, 4.0}) {
    CHECK(law->cond_mean(y) == doctest::Approx(0.5 * y).epsilon(1e-14));
    CHECK(law->cond_mean_slope(y) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("gaussian with nonzero means") {
  DistributionSpec s;
  s.mu_S = 0.3;
  s.mu_M = -0.8;
  s.sigma_S = 1.2;
  s.sigma_M = 0.7;
  const double gc = 1.5;
  const auto law = build_typelaw(s, gc);
  const double var_Y = 1.44 + gc * gc * 0.49;
  const double beta = 1.44 / var_Y;
  const double mu_Y = 0.3 - gc * -0.8;
  CHECK(law->mean() == doctest::Approx(mu_Y));
  CHECK(*law->beta() == doctest::Approx(beta));
  for (double y : {-2.0, 0.5, 3.0}) {
    const double expected = 0.3 + beta * (y - mu_Y);
    CHECK(law->cond_mean(y) == doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK(law->partial_payoff(1.0) + law->tail_payoff(1.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("beta near one makes g the identity") {
  DistributionSpec s;
  s.sigma_M = 1e-4;
  const auto law = build_typelaw(s, 1.0);
  CHECK(*law->beta() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(law->cond_mean(2.0) == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("gaussian_with_beta keeps the type variance") {
  const auto spec = gaussian_with_beta(0.55, 2.0, 3.0);
  const auto law = build_typelaw(spec, 2.0);
  CHECK(*law->beta() == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(law->scale() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_with_beta(1.0, 1.0), DomainError);
}

TEST_CASE("standard normal hazards") {
  const auto law = build_typelaw(gaussian_with_beta(0.5, 1.0, 1.0), 1.0);
  CHECK(law->hazard_minus(0.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-14));
  CHECK(law->hazard_plus(0.0) == doctest::Approx(law->hazard_minus(0.0)).epsilon(1e-15));
  // F/f overflows once phi underflows, near y = 38
  double prev = law->hazard_minus(-40.0);
  for (double y = -39.5; y <= 35.0; y += 0.5) {
    const double h = law->hazard_minus(y);
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("gaussian functionals are consistent") {
  const auto law = base_gaussian();
  for (double y : {-30.0, -5.0, -1.0, 0.0, 0.8, 6.0, 30.0}) {
    CHECK(law->pdf(y) > 0.0);
    CHECK(law->cdf(y) + law->sf(y) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(law->partial_payoff(y) + law->tail_payoff(y) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const double h = 1e-5;
    const double fd_minus = (law->hazard_minus(y + h) - law->hazard_minus(y - h)) / (2 * h);
    const double fd_plus = (law->hazard_plus(y + h) - law->hazard_plus(y - h)) / (2 * h);
    CHECK(law->hazard_minus_slope(y) == doctest::Approx(fd_minus).epsilon(1e-6));
    CHECK(law->hazard_plus_slope(y) == doctest::Approx(fd_plus).epsilon(1e-6));
  }
  // H' = f g
  const double y = 0.4;
  const double fd = (law->partial_payoff(y + 1e-5) - law->partial_payoff(y - 1e-5)) / 2e-5;
  CHECK(fd == doctest::Approx(law->pdf(y) * law->cond_mean(y)).epsilon(1e-7));
}

TEST_CASE("two-sided exponential conditional mean matches direct quadrature") {
  const auto law = build_typelaw(laplace_spec(), 1.0);
  for (double y : {-2.0, 0.0, 2.0}) {
    // E[S | S - M = y] = int s f_S(s) f_M(s - y) ds / int f_S(s) f_M(s - y) ds
    auto num_fn = [y](double s) { return s * laplace_pdf(s) * laplace_pdf(s - y); };
    auto den_fn = [y](double s) { return laplace_pdf(s) * laplace_pdf(s - y); };
    double num = 0.0;
    double den = 0.0;
    for (auto [a, b] : {std::pair{-60.0, std::min(0.0, y)}, std::pair{std::min(0.0, y), std::max(0.0, y)},
                        std::pair{std::max(0.0, y), 60.0}}) {
      num += num::integrate(num_fn, a, b, 1e-13);
      den += num::integrate(den_fn, a, b, 1e-13);
    }
    CHECK(law->cond_mean(y) == doctest::Approx(num / den).epsilon(1e-6));
    CHECK(law->pdf(y) == doctest::Approx(den).epsilon(1e-6));
  }
}

TEST_CASE("two-sided exponential functionals") {
  const auto law = build_typelaw(laplace_spec(), 1.0);
  CHECK_FALSE(law->beta().has_value());
  const double total = num::integrate([&](double y) { return law->pdf(y); }, -80.0, 80.0, 1e-12);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  for (double y : {-10.0, -1.0, 0.0, 2.5, 10.0}) {
    CHECK(law->cdf(y) + law->sf(y) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(law->partial_payoff(y) + law->tail_payoff(y) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  }
  double prev_minus = law->hazard_minus(-20.0);
  double prev_plus = -law->hazard_plus(-20.0);
  for (double y = -19.5; y <= 20.0; y += 0.5) {
    CHECK(law->hazard_minus(y) >= prev_minus - 1e-10);
    CHECK(-law->hazard_plus(y) >= prev_plus - 1e-10);
    prev_minus = law->hazard_minus(y);
    prev_plus = -law->hazard_plus(y);
  }
}

TEST_CASE("custom log-concave law reproduces the gaussian") {
  DistributionSpec s;
  s.family = Family::custom_logconcave;
  s.log_density_S = [](double x) { return -0.5 * x * x; };
  s.log_density_M = [](double x) { return -0.5 * x * x; };
  const auto custom = build_typelaw(s, 1.0);
  const auto exact = base_gaussian();
  for (double y : {-3.0, -1.0, 0.0, 0.5, 2.0}) {
    CHECK(custom->pdf(y) == doctest::Approx(exact->pdf(y)).epsilon(1e-6));
    CHECK(custom->cdf(y) == doctest::Approx(exact->cdf(y)).epsilon(1e-6));
    CHECK(custom->cond_mean(y) == doctest::Approx(exact->cond_mean(y)).scale(1.0).epsilon(1e-6));
  }
}

TEST_CASE("non-log-concave custom density is rejected") {
  DistributionSpec s;
  s.family = Family::custom_logconcave;
  // two-bump mixture
  s.log_density_S = [](double x) { return std::log(std::exp(-2.0 * (x - 2) * (x - 2)) + std::exp(-2.0 * (x + 2) * (x + 2))); };
  s.log_density_M = [](double x) { return -0.5 * x * x; };
  CHECK_THROWS_AS(build_typelaw(s, 1.0), DomainError);
}

TEST_CASE("invalid parameters are rejected") {
  DistributionSpec s;
  s.sigma_S = -1.0;
  CHECK_THROWS_AS(build_typelaw(s, 1.0), DomainError);
  CHECK_THROWS_AS(build_typelaw(DistributionSpec{}, 0.0), DomainError);
}

TEST_CASE("family names") {
  CHECK(parse_family("gaussian") == Family::gaussian);
  CHECK(parse_family("normal") == Family::gaussian);
  CHECK(parse_family("laplace") == Family::two_sided_exponential);
  CHECK(parse_family(family_name(Family::two_sided_exponential)) == Family::two_sided_exponential);
  CHECK_THROWS(parse_family("cauchy"));
}

TEST_CASE("efron bounds") {
  for (double beta : {0.5, 0.9}) {
    const auto law = build_typelaw(gaussian_with_beta(beta, 1.0), 1.0);
    const auto r = efron_check(*law, num::linspace(-5.0, 5.0, 201));
    CHECK(r.pass);
    CHECK(r.min_slope == doctest::Approx(beta).epsilon(1e-8));
    CHECK(r.max_slope == doctest::Approx(beta).epsilon(1e-8));
  }
  const auto lap = build_typelaw(laplace_spec(), 1.0);
  const auto r = efron_check(*lap, num::linspace(-6.0, 6.0, 201));
  CHECK(r.pass);
  CHECK(r.min_slope > 0.0);
  CHECK(r.max_slope < 1.0);
}
