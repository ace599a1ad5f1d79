#include "dealer/schedule.hpp"

#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp uses isnan unqualified
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>

#include "dealer/numerics.hpp"

namespace dealer {

namespace {

using Vec = std::vector<double>;

// One half-line of a sampled schedule: a cubic piece on [front, back] and linear
// continuation outside.
struct SampledSide {
  PriceSchedule::Fn value;
  PriceSchedule::Fn derivative;
  double front = 0.0;
  double back = 0.0;
  double value_front = 0.0;
  double value_back = 0.0;
  double slope_front = 0.0;
  double slope_back = 0.0;
  Vec knots;
  // cumulative[i] = integral of the marginal from 0 to knots[i]
  Vec cumulative;

  double operator()(double n) const {
    if (n < front) return value_front + slope_front * (n - front);
    if (n > back) return value_back + slope_back * (n - back);
    return value(n);
  }
  double prime(double n) const {
    if (n < front) return slope_front;
    if (n > back) return slope_back;
    return derivative(n);
  }
  // Simpson's rule is exact on each cubic piece.
  double simpson(double a, double b) const {
    return (b - a) / 6.0 * (value(a) + 4.0 * value(0.5 * (a + b)) + value(b));
  }
  // Integral of the marginal from 0 to n, n on this side of 0.
  double primitive(double n) const {
    if (n <= front) {
      const double d = n - front;
      return cumulative.front() + value_front * d + 0.5 * slope_front * d * d;
    }
    if (n >= back) {
      const double d = n - back;
      return cumulative.back() + value_back * d + 0.5 * slope_back * d * d;
    }
    const auto it = std::upper_bound(knots.begin(), knots.end(), n);
    const std::size_t i = static_cast<std::size_t>(it - knots.begin()) - 1;
    return cumulative[i] + simpson(knots[i], n);
  }
  void accumulate() {
    cumulative.assign(knots.size(), 0.0);
    const std::size_t zero = knots.front() == 0.0 ? 0 : knots.size() - 1;
    for (std::size_t i = zero + 1; i < knots.size(); ++i)
      cumulative[i] = cumulative[i - 1] + simpson(knots[i - 1], knots[i]);
    for (std::size_t i = zero; i-- > 0;)
      cumulative[i] = cumulative[i + 1] - simpson(knots[i], knots[i + 1]);
  }
};

SampledSide make_side(Vec n, Vec p, Vec slope) {
  if (n.size() < 2 || n.size() != p.size())
    throw DomainError("sampled schedule needs at least two samples per side and matching sizes");
  for (std::size_t i = 1; i < n.size(); ++i)
    if (!(n[i] > n[i - 1])) throw DomainError("sample abscissae must be strictly increasing");
  SampledSide side;
  side.front = n.front();
  side.back = n.back();
  side.value_front = p.front();
  side.value_back = p.back();
  side.knots = n;
  if (!slope.empty()) {
    if (slope.size() != n.size()) throw DomainError("slope samples must match the abscissae");
    side.slope_front = slope.front();
    side.slope_back = slope.back();
    auto spline = std::make_shared<boost::math::interpolators::cubic_hermite<Vec>>(
        std::move(n), std::move(p), std::move(slope));
    side.value = [spline](double x) { return (*spline)(x); };
    side.derivative = [spline](double x) { return spline->prime(x); };
  } else {
    auto spline = std::make_shared<boost::math::interpolators::pchip<Vec>>(std::move(n), std::move(p));
    side.slope_front = spline->prime(side.front);
    side.slope_back = spline->prime(side.back);
    side.value = [spline](double x) { return (*spline)(x); };
    side.derivative = [spline](double x) { return spline->prime(x); };
  }
  side.accumulate();
  return side;
}

}  // namespace

PriceSchedule PriceSchedule::from_function(Fn marginal, double bid, double ask,
                                           double left_asymptote, double right_asymptote, Fn slope,
                                           double n_scale) {
  if (!marginal) throw DomainError("schedule needs a marginal-price function");
  if (!(bid <= ask)) throw DomainError("schedule bid must not exceed ask");
  PriceSchedule s;
  s.marginal_ = std::move(marginal);
  s.slope_ = std::move(slope);
  s.bid_ = bid;
  s.ask_ = ask;
  s.left_ = left_asymptote;
  s.right_ = right_asymptote;
  s.n_scale_ = n_scale > 0.0 ? n_scale : 1.0;
  return s;
}

PriceSchedule PriceSchedule::from_samples(Vec neg_n, Vec neg_p, Vec pos_n, Vec pos_p,
                                          Vec neg_slope, Vec pos_slope) {
  if (neg_n.empty() || pos_n.empty() || neg_n.back() != 0.0 || pos_n.front() != 0.0)
    throw DomainError("sampled schedule sides must end and start at n = 0");
  const double bid = neg_p.back();
  const double ask = pos_p.front();
  const double scale = std::max(-neg_n.front(), pos_n.back()) / 5.0;
  auto left = make_side(std::move(neg_n), std::move(neg_p), std::move(neg_slope));
  auto right = make_side(std::move(pos_n), std::move(pos_p), std::move(pos_slope));
  const double left_asym = left.slope_front > 0.0 ? -kInf : left.value_front;
  const double right_asym = right.slope_back > 0.0 ? kInf : right.value_back;
  Fn marginal = [left, right](double n) { return n < 0.0 ? left(n) : right(n); };
  Fn slope = [left, right](double n) { return n < 0.0 ? left.prime(n) : right.prime(n); };
  auto out = from_function(std::move(marginal), bid, ask, left_asym, right_asym, std::move(slope), scale);
  out.primitive_ = [left, right](double n) { return n < 0.0 ? left.primitive(n) : right.primitive(n); };
  return out;
}

double PriceSchedule::marginal(double n) const { return n == 0.0 ? bid_ : marginal_(n); }

double PriceSchedule::slope(double n) const {
  if (slope_) return slope_(n);
  const double h = 1e-6 * std::max(n_scale_, std::abs(n));
  if (n < 0.0 && n + h >= 0.0) return (marginal_(n) - marginal_(n - h)) / h;
  if (n > 0.0 && n - h <= 0.0) return (marginal_(n + h) - marginal_(n)) / h;
  return (marginal_(n + h) - marginal_(n - h)) / (2.0 * h);
}

double PriceSchedule::price(double n) const {
  if (n == 0.0) return 0.0;
  if (primitive_) return primitive_(n);
  const double at_zero = n < 0.0 ? bid_ : ask_;
  return num::integrate([this, at_zero](double t) { return t == 0.0 ? at_zero : marginal_(t); },
                        0.0, n, 1e-10);
}

double PriceSchedule::inverse(double m) const {
  if (m >= bid_ && m <= ask_) return 0.0;
  const double huge = 1e12 * n_scale_;
  if (m < bid_) {
    if (m <= left_) return -kInf;
    double lo = -n_scale_;
    while (marginal_(lo) > m) {
      lo *= 2.0;
      if (lo < -huge) return -kInf;
    }
    auto fn = [this](double n) { return n < 0.0 ? marginal_(n) : bid_; };
    const auto r = num::solve_in_bracket(fn, m, lo, 0.0, 1e-13 * n_scale_);
    if (!r.ok) throw SolverError("schedule inversion failed on the bid side");
    return r.x;
  }
  if (m >= right_) return kInf;
  double hi = n_scale_;
  while (marginal_(hi) < m) {
    hi *= 2.0;
    if (hi > huge) return kInf;
  }
  auto fn = [this](double n) { return n > 0.0 ? marginal_(n) : ask_; };
  const auto r = num::solve_in_bracket(fn, m, 0.0, hi, 1e-13 * n_scale_);
  if (!r.ok) throw SolverError("schedule inversion failed on the ask side");
  return r.x;
}

PriceSchedule PriceSchedule::perturbed(Fn delta, Fn delta_slope, double delta_bid,
                                       double delta_ask, double delta_left,
                                       double delta_right) const {
  const PriceSchedule base = *this;
  Fn marginal = [base, delta](double n) { return base.marginal_(n) + delta(n); };
  Fn slope = [base, delta_slope](double n) { return base.slope(n) + delta_slope(n); };
  auto out = from_function(std::move(marginal), bid_ + delta_bid, ask_ + delta_ask,
                           left_ + delta_left, right_ + delta_right, std::move(slope), n_scale_);
  if (primitive_) {
    out.primitive_ = [base, delta](double n) {
      return base.primitive_(n) + num::integrate(delta, 0.0, n, 1e-10);
    };
  }
  return out;
}

}  // namespace dealer

namespace dealer {

std::vector<double> prices_on_grid(const PriceSchedule& schedule, const std::vector<double>& grid) {
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
  std::vector<double> out(grid.size(), 0.0);
  auto integrand = [&](double t) { return schedule.marginal(t); };
  if (schedule.has_exact_price()) {
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = schedule.price(grid[i]);
    return out;
  }
  double prev_n = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double n = grid[order[i]];
    if (n <= 0.0) continue;
    acc += num::integrate(integrand, prev_n, n, 1e-10);
    out[order[i]] = acc;
    prev_n = n;
  }
  prev_n = 0.0;
  acc = 0.0;
  for (std::size_t i = order.size(); i-- > 0;) {
    const double n = grid[order[i]];
    if (n >= 0.0) continue;
    acc += num::integrate(integrand, prev_n, n, 1e-10);
    out[order[i]] = acc;
    prev_n = n;
  }
  return out;
}

}  // namespace dealer
