#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace dealer {

/// Marginal-price schedule p = P' on the real line minus {0}, with one-sided
/// limits bid = p(0-) and ask = p(0+). P(0) = 0.
class PriceSchedule {
 public:
  using Fn = std::function<double(double)>;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  /// `marginal` is called only with n != 0. When `slope` is empty the slope is
  /// estimated by central differences.
  static PriceSchedule from_function(Fn marginal, double bid, double ask,
                                     double left_asymptote = -kInf, double right_asymptote = kInf,
                                     Fn slope = {}, double n_scale = 1.0);

  /// Sampled backing. `neg_n` is ascending and ends at 0, `pos_n` is ascending
  /// and starts at 0, so the first/last samples are the bid and ask. With slopes
  /// the pieces are cubic Hermite; without, they are monotone (PCHIP) cubics.
  /// Beyond the samples the marginal continues linearly with the end slope.
  static PriceSchedule from_samples(std::vector<double> neg_n, std::vector<double> neg_p,
                                    std::vector<double> pos_n, std::vector<double> pos_p,
                                    std::vector<double> neg_slope = {},
                                    std::vector<double> pos_slope = {});

  /// p(n); at n = 0 the bid is returned.
  double marginal(double n) const;
  double slope(double n) const;
  /// P(n) by adaptive quadrature of the marginal.
  double price(double n) const;
  /// True for sampled schedules and their perturbations, whose P is exact.
  bool has_exact_price() const { return static_cast<bool>(primitive_); }
  /// p^{-1}(m) with p^{-1}(m) = 0 on [bid, ask]. Returns -inf/+inf when m lies
  /// beyond the corresponding asymptote.
  double inverse(double m) const;

  double bid() const { return bid_; }
  double ask() const { return ask_; }
  double spread() const { return ask_ - bid_; }
  double left_asymptote() const { return left_; }
  double right_asymptote() const { return right_; }
  /// Characteristic size of trades, used to seed bracket searches.
  double n_scale() const { return n_scale_; }

  /// New schedule with marginal q(n) = p(n) + delta(n), delta being continuous
  /// on each half-line; delta(0-) and delta(0+) shift the bid and ask and the
  /// limits of delta at -inf/+inf shift the asymptotes.
  PriceSchedule perturbed(Fn delta, Fn delta_slope, double delta_bid, double delta_ask,
                          double delta_left = 0.0, double delta_right = 0.0) const;

 private:
  Fn marginal_;
  Fn slope_;
  Fn primitive_;
  double bid_ = 0.0;
  double ask_ = 0.0;
  double left_ = -kInf;
  double right_ = kInf;
  double n_scale_ = 1.0;
};

}  // namespace dealer

namespace dealer {

/// P(n) at every grid point, integrating outward from 0 piece by piece.
std::vector<double> prices_on_grid(const PriceSchedule& schedule, const std::vector<double>& grid);

}  // namespace dealer
