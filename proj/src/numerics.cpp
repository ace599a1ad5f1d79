#include "dealer/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dealer::num {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kSqrt2Pi = 2.50662827463100050241576528481;

// Backward evaluation of the Laplace continued fraction for the upper Mills
// ratio, R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))). Converges fast for x > 6.
double mills_continued_fraction(double x) {
  double t = x;
  for (int k = 120; k >= 1; --k) t = x + k / t;
  return 1.0 / t;
}

}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double mills_upper(double z) {
  if (z > 6.0) return mills_continued_fraction(z);
  if (z > -37.0) return 0.5 * std::erfc(z / std::numbers::sqrt2) * kSqrt2Pi * std::exp(0.5 * z * z);
  return std::numeric_limits<double>::infinity();
}

double mills_lower(double z) { return mills_upper(-z); }

RootResult solve_in_bracket(const std::function<double(double)>& fn, double target, double lo,
                            double hi, double xtol) {
  RootResult out;
  auto g = [&](double x) {
    ++out.evaluations;
    return fn(x) - target;
  };
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return {lo, true, out.evaluations};
  if (ghi == 0.0) return {hi, true, out.evaluations};
  if (!(glo < 0.0) || !(ghi > 0.0)) return out;

  double width_before = hi - lo;
  int side = 0;  // last endpoint that moved: -1 lo, +1 hi
  for (int iter = 0; iter < 300; ++iter) {
    const double width = hi - lo;
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (width <= xtol || width <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;

    double x = 0.5 * (lo + hi);
    const bool force_bisect = (iter % 3 == 2) && width > 0.5 * width_before;
    if (iter % 3 == 2) width_before = width;
    if (!force_bisect && std::isfinite(glo) && std::isfinite(ghi)) {
      const double secant = lo - glo * (hi - lo) / (ghi - glo);
      const double guard = 1e-3 * width;
      if (secant > lo + guard && secant < hi - guard) x = secant;
    }
    if (!(x > lo && x < hi)) break;
    const double gx = g(x);
    if (gx == 0.0) return {x, true, out.evaluations};
    if (std::isnan(gx)) return out;
    if (gx < 0.0) {
      lo = x;
      glo = gx;
      if (side == -1 && std::isfinite(ghi)) ghi *= 0.5;  // Illinois step
      side = -1;
    } else {
      hi = x;
      ghi = gx;
      if (side == 1 && std::isfinite(glo)) glo *= 0.5;
      side = 1;
    }
  }
  out.x = 0.5 * (lo + hi);
  out.ok = true;
  return out;
}

RootResult solve_increasing(const std::function<double(double)>& fn, double target, double guess,
                            double step, double xtol, int max_expansions) {
  int evaluations = 1;
  const double g0 = fn(guess) - target;
  if (g0 == 0.0) return {guess, true, evaluations};
  if (std::isnan(g0)) return {guess, false, evaluations};
  step = std::abs(step) > 0.0 ? std::abs(step) : 1.0;

  double near = guess;
  double far = guess;
  const double direction = g0 < 0.0 ? 1.0 : -1.0;
  bool bracketed = false;
  for (int k = 0; k < max_expansions; ++k) {
    far = near + direction * step;
    const double gf = fn(far) - target;
    ++evaluations;
    if (std::isnan(gf)) break;
    if ((direction > 0.0 && gf >= 0.0) || (direction < 0.0 && gf <= 0.0)) {
      bracketed = true;
      break;
    }
    near = far;
    step *= 2.0;
  }
  if (!bracketed) return {far, false, evaluations};
  auto res = direction > 0.0 ? solve_in_bracket(fn, target, near, far, xtol)
                             : solve_in_bracket(fn, target, far, near, xtol);
  res.evaluations += evaluations;
  return res;
}

double integrate(const std::function<double(double)>& fn, double a, double b, double rel_tol,
                 double* error_estimate) {
  if (a == b) {
    if (error_estimate) *error_estimate = 0.0;
    return 0.0;
  }
  if (a > b) return -integrate(fn, b, a, rel_tol, error_estimate);
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      fn, a, b, 15, rel_tol, &err);
  if (error_estimate) *error_estimate = err;
  return value;
}

std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = a;
    return out;
  }
  const double h = (b - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = a + h * static_cast<double>(i);
  out.back() = b;
  return out;
}

}  // namespace dealer::num
