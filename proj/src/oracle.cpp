#include "dealer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dealer/client.hpp"
#include "dealer/monopoly.hpp"
#include "dealer/numerics.hpp"

namespace dealer {

std::string perturbation_name(Perturbation kind) {
  switch (kind) {
    case Perturbation::identity:
      return "identity";
    case Perturbation::marginal_shift:
      return "marginal_shift";
    case Perturbation::marginal_tilt:
      return "marginal_tilt";
    case Perturbation::bump:
      return "bump";
  }
  return "unknown";
}

PriceSchedule apply_deviation(const PriceSchedule& base, const DeviationSpec& dev) {
  const double a = dev.amount;
  switch (dev.kind) {
    case Perturbation::identity:
      return base;
    case Perturbation::marginal_shift:
      return base.perturbed([a](double) { return a; }, [](double) { return 0.0; }, a, a, a, a);
    case Perturbation::marginal_tilt: {
      const double inf = PriceSchedule::kInf;
      const double left = a > 0.0 ? -inf : (a < 0.0 ? inf : 0.0);
      return base.perturbed([a](double n) { return a * n; }, [a](double) { return a; }, 0.0, 0.0,
                            left, -left);
    }
    case Perturbation::bump: {
      const double c = dev.center;
      const double w = dev.width;
      if (!(w > 0.0)) throw DomainError("bump width must be positive");
      auto bump = [a, c, w](double n) {
        const double u = (n - c) / w;
        return a * std::exp(-u * u);
      };
      auto bump_slope = [a, c, w](double n) {
        const double u = (n - c) / w;
        return -2.0 * a * u / w * std::exp(-u * u);
      };
      const double at_zero = bump(0.0);
      return base.perturbed(bump, bump_slope, at_zero, at_zero);
    }
  }
  throw DomainError("unknown perturbation");
}

std::vector<DeviationSpec> random_deviations(const PriceSchedule& base, int count, std::uint64_t seed,
                                             double gamma_c) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> size(0.01, 0.10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double s = base.n_scale();
  const double ref = base.spread() > 0.0 ? base.spread() : base.marginal(s) - base.marginal(-s);
  std::vector<DeviationSpec> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 100 * std::max(count, 1)) throw SolverError("could not draw admissible deviations");
    DeviationSpec dev;
    const double magnitude = size(rng) * ref * (unit(rng) < 0.5 ? -1.0 : 1.0);
    switch (out.size() % 3) {
      case 0:
        dev.kind = Perturbation::marginal_shift;
        dev.amount = magnitude;
        break;
      case 1:
        dev.kind = Perturbation::marginal_tilt;
        dev.amount = magnitude / s;
        break;
      default:
        dev.kind = Perturbation::bump;
        dev.amount = magnitude;
        dev.center = (4.0 * unit(rng) - 2.0) * s;
        dev.width = (0.3 + 0.7 * unit(rng)) * s;
        break;
    }
    const auto candidate = apply_deviation(base, dev);
    if (!check_admissible(candidate, 2, gamma_c).admissible) continue;
    if (!check_compatible({candidate, base}).compatible) continue;
    out.push_back(dev);
  }
  return out;
}

double deviation_profit(const TypeLaw& law, int K, double gamma_c, double gamma_d,
                        const PriceSchedule& p_star, const PriceSchedule& p1) {
  auto type_of_trade = [&](double n) {
    const double m = p1.marginal(n);
    return m + gamma_c * n + gamma_c * (K - 1) * p_star.inverse(m);
  };
  std::vector<double> kinks;
  if (p_star.bid() < p1.bid()) kinks.push_back(p1.inverse(p_star.bid()));
  if (p_star.ask() > p1.ask()) kinks.push_back(p1.inverse(p_star.ask()));
  kinks.erase(std::remove_if(kinks.begin(), kinks.end(), [](double k) { return !std::isfinite(k) || k == 0.0; }),
              kinks.end());
  return dealer_profit(law, p1, type_of_trade, gamma_d, kinks);
}

DeviationOutcome dealer_profit_deviation(const TypeLaw& law, int K, double gamma_c, double gamma_d,
                                         const PriceSchedule& p_star, const DeviationSpec& dev) {
  const auto p1 = apply_deviation(p_star, dev);
  if (dev.kind != Perturbation::identity) {
    const auto adm = check_admissible(p1, std::max(K, 2), gamma_c);
    if (!adm.admissible) throw DomainError("deviation is not admissible: " + adm.diagnostics);
    if (!check_compatible({p1, p_star}).compatible) throw DomainError("deviation is not compatible");
  }
  DeviationOutcome out;
  out.J_base = deviation_profit(law, K, gamma_c, gamma_d, p_star, p_star);
  out.J_dev = dev.kind == Perturbation::identity ? out.J_base
                                                 : deviation_profit(law, K, gamma_c, gamma_d, p_star, p1);
  return out;
}

EtaFunctions::EtaFunctions(const TypeLaw& law, int K, double gamma_c, double gamma_d)
    : law_(law), K_(K), gamma_c_(gamma_c), gamma_d_(gamma_d) {}

double EtaFunctions::type(double n, double x, double z) const {
  return z + gamma_c_ * n + gamma_c_ * (K_ - 1) * x;
}

double EtaFunctions::eta_minus(double n, double x, double z) const {
  const double y = type(n, x, z);
  return (gamma_d_ * n - z) * law_.cdf(y) + law_.partial_payoff(y);
}

double EtaFunctions::eta_plus(double n, double x, double z) const {
  const double y = type(n, x, z);
  return -(gamma_d_ * n - z) * law_.sf(y) - law_.tail_payoff(y);
}

double EtaFunctions::A(double n, double x, double z) const {
  const double y = type(n, x, z);
  return (gamma_d_ + gamma_c_) * n + gamma_c_ * (K_ - 1) * x - (y - law_.cond_mean(y));
}

double EtaFunctions::B_minus(double n, double x, double z) const {
  const double y = type(n, x, z);
  return -(gamma_d_ + gamma_c_) * n - gamma_c_ * (K_ - 1) * x +
         (y + law_.hazard_minus(y) - law_.cond_mean(y));
}

double EtaFunctions::B_plus(double n, double x, double z) const {
  const double y = type(n, x, z);
  return -(gamma_d_ + gamma_c_) * n - gamma_c_ * (K_ - 1) * x +
         (y - law_.hazard_plus(y) - law_.cond_mean(y));
}

double EtaFunctions::d_eta_dx(double n, double x, double z) const {
  return (K_ - 1) * gamma_c_ * law_.pdf(type(n, x, z)) * A(n, x, z);
}

double EtaFunctions::d_eta_dz(double n, double x, double z, int side) const {
  const double f = law_.pdf(type(n, x, z));
  return -f * (side < 0 ? B_minus(n, x, z) : B_plus(n, x, z));
}

PointwiseReport pointwise_optimality_check(const TypeLaw& law, int K, double gamma_c, double gamma_d,
                                           const PriceSchedule& p_star,
                                           const std::vector<double>& n_grid,
                                           const std::vector<double>& x_grid, int zero_points,
                                           double tol) {
  const EtaFunctions eta(law, K, gamma_c, gamma_d);
  PointwiseReport report;
  report.worst_excess = -PriceSchedule::kInf;
  auto consider = [&](double n, double x, double z, double reference, int side) {
    const double value = side < 0 ? eta.eta_minus(n, x, z) : eta.eta_plus(n, x, z);
    const double excess = value - reference;
    ++report.comparisons;
    if (excess > report.worst_excess) {
      report.worst_excess = excess;
      report.worst_n = n;
      report.worst_x = x;
      report.worst_z = z;
    }
    if (excess > tol * (1.0 + std::abs(reference))) report.pass = false;
  };
  for (double n : n_grid) {
    if (n == 0.0) continue;
    const int side = n < 0.0 ? -1 : 1;
    const double own = p_star.marginal(n);
    const double reference = side < 0 ? eta.eta_minus(n, n, own) : eta.eta_plus(n, n, own);
    for (double x : x_grid) {
      if (x == 0.0) continue;
      const double mag_x = side * x;
      const double mag_n = side * n;
      if (mag_x >= mag_n)
        ++report.case_beyond;
      else if (mag_x > 0.0)
        ++report.case_between;
      else
        ++report.case_opposite;
      consider(n, x, p_star.marginal(x), reference, side);
    }
    for (int j = 0; j < zero_points; ++j) {
      const double frac = zero_points > 1 ? static_cast<double>(j) / (zero_points - 1) : 0.5;
      ++report.case_zero;
      consider(n, 0.0, p_star.bid() + frac * p_star.spread(), reference, side);
    }
  }
  return report;
}

ClientGridOracle::ClientGridOracle(std::vector<PriceSchedule> schedules, double gamma_c, double reach,
                                   double step)
    : schedules_(std::move(schedules)), gamma_c_(gamma_c), step_(step) {
  if (schedules_.empty()) throw DomainError("grid oracle needs at least one schedule");
  if (!(step > 0.0) || !(reach > step)) throw DomainError("grid oracle needs 0 < step < reach");
  const auto half = static_cast<long>(std::llround(reach / step));
  for (long k = -half; k <= half; ++k) grid_.push_back(static_cast<double>(k) * step);
  const std::size_t distinct = schedules_.size() <= 2 ? schedules_.size() : 1;
  for (std::size_t s = 0; s < distinct; ++s) prices_.push_back(prices_on_grid(schedules_[s], grid_));
}

double ClientGridOracle::objective(const std::vector<std::size_t>& idx, double y) const {
  double total = 0.0;
  double paid = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    total += grid_[idx[k]];
    paid += prices_[std::min(k, prices_.size() - 1)][idx[k]];
  }
  return y * total - paid - 0.5 * gamma_c_ * total * total;
}

GridArgmax ClientGridOracle::argmax(double y) const {
  const std::size_t size = grid_.size();
  GridArgmax best;
  best.value = -PriceSchedule::kInf;
  if (schedules_.size() != 2) {
    const std::size_t count = schedules_.size();
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < size; ++i) {
      const double v = objective(std::vector<std::size_t>(count, i), y);
      if (v > best.value) {
        best.value = v;
        best_i = i;
      }
    }
    best.trades.assign(count, grid_[best_i]);
    best.on_boundary = best_i == 0 || best_i + 1 == size;
    return best;
  }
  const std::size_t stride = std::max<std::size_t>(1, size / 200);
  std::size_t bi = 0;
  std::size_t bj = 0;
  for (std::size_t i = 0; i < size; i += stride)
    for (std::size_t j = 0; j < size; j += stride) {
      const double v = objective({i, j}, y);
      if (v > best.value) {
        best.value = v;
        bi = i;
        bj = j;
      }
    }
  const std::size_t window = 2 * stride;
  const std::size_t i_lo = bi > window ? bi - window : 0;
  const std::size_t j_lo = bj > window ? bj - window : 0;
  const std::size_t i_hi = std::min(size - 1, bi + window);
  const std::size_t j_hi = std::min(size - 1, bj + window);
  for (std::size_t i = i_lo; i <= i_hi; ++i)
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      const double v = objective({i, j}, y);
      if (v > best.value) {
        best.value = v;
        bi = i;
        bj = j;
      }
    }
  best.trades = {grid_[bi], grid_[bj]};
  best.on_boundary = bi == 0 || bj == 0 || bi + 1 == size || bj + 1 == size;
  return best;
}

GridArgmax client_grid_oracle(const std::vector<PriceSchedule>& schedules, double gamma_c, double y,
                              double reach, double step) {
  return ClientGridOracle(schedules, gamma_c, reach, step).argmax(y);
}

MonteCarloEstimate monte_carlo_profit(const TypeLaw& law, const PriceSchedule& schedule, int K,
                                      double gamma_c, double gamma_d, std::size_t samples,
                                      std::uint64_t seed) {
  if (samples < 2) throw DomainError("Monte Carlo needs at least two samples");
  const ClientResponse response(schedule, K, gamma_c);
  const double lo = law.mean() - 12.0 * law.scale();
  const double hi = law.mean() + 12.0 * law.scale();
  auto ys = num::linspace(lo, hi, 8001);
  for (double edge : {response.a(), response.b()})
    if (edge > lo && edge < hi) ys.push_back(edge);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<double> trades;
  for (double y : ys) trades.push_back(response.n_of_y(y));
  const auto paid = prices_on_grid(schedule, trades);

  auto value_at = [&](double y) {
    double n;
    double P;
    if (y <= lo || y >= hi) {
      n = response.n_of_y(y);
      P = schedule.price(n);
    } else {
      const auto it = std::upper_bound(ys.begin(), ys.end(), y);
      const std::size_t j = static_cast<std::size_t>(it - ys.begin());
      const double w = (y - ys[j - 1]) / (ys[j] - ys[j - 1]);
      n = (1.0 - w) * trades[j - 1] + w * trades[j];
      P = (1.0 - w) * paid[j - 1] + w * paid[j];
    }
    return P - law.cond_mean(y) * n - 0.5 * gamma_d * n * n;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& spec = law.spec();
  auto draw = [&]() {
    switch (spec.family) {
      case Family::gaussian:
        return law.mean() + law.scale() * normal(rng);
      case Family::two_sided_exponential: {
        auto laplace = [&](double sd) {
          const double e = expo(rng) * sd / std::numbers::sqrt2;
          return unit(rng) < 0.5 ? -e : e;
        };
        const double s = spec.mu_S + laplace(spec.sigma_S);
        const double m = spec.mu_M + laplace(spec.sigma_M);
        return s - gamma_c * m;
      }
      case Family::custom_logconcave: {
        const double u = unit(rng);
        const auto r = num::solve_increasing([&](double y) { return law.cdf(y); }, u, law.mean(),
                                             law.scale(), 1e-12 * law.scale());
        return r.x;
      }
    }
    return law.mean();
  };

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = value_at(draw());
    sum += v;
    sum_sq += v * v;
  }
  MonteCarloEstimate out;
  out.samples = samples;
  out.mean = sum / static_cast<double>(samples);
  const double var = (sum_sq - static_cast<double>(samples) * out.mean * out.mean) /
                     static_cast<double>(samples - 1);
  out.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(samples));
  return out;
}

}  // namespace dealer
