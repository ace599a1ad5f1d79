#include "dealer/typelaw.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dealer/numerics.hpp"

namespace dealer {

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DomainError(std::string(name) + " must be positive and finite");
}

class GaussianLaw final : public TypeLaw {
 public:
  GaussianLaw(const DistributionSpec& spec, double gamma_c) : TypeLaw(spec, gamma_c) {
    const double var_S = spec.sigma_S * spec.sigma_S;
    const double var_X = gamma_c * gamma_c * spec.sigma_M * spec.sigma_M;
    mu_S_ = spec.mu_S;
    mu_Y_ = spec.mu_S - gamma_c * spec.mu_M;
    sigma_Y_ = std::sqrt(var_S + var_X);
    beta_ = var_S / (var_S + var_X);
    slope_ = *beta_;
    intercept_ = (1.0 - slope_) * mu_Y_ + gamma_c * spec.mu_M;
  }

  double pdf(double y) const override { return num::normal_pdf(z(y)) / sigma_Y_; }
  double cdf(double y) const override { return num::normal_cdf(z(y)); }
  double sf(double y) const override { return num::normal_sf(z(y)); }
  double cond_mean(double y) const override { return intercept_ + slope_ * y; }
  double cond_mean_slope(double) const override { return slope_; }

  double partial_payoff(double y) const override {
    const double F = cdf(y);
    return intercept_ * F + slope_ * (mu_Y_ * F - sigma_Y_ * sigma_Y_ * pdf(y));
  }
  double tail_payoff(double y) const override {
    const double Fbar = sf(y);
    return intercept_ * Fbar + slope_ * (mu_Y_ * Fbar + sigma_Y_ * sigma_Y_ * pdf(y));
  }

  double hazard_minus(double y) const override { return sigma_Y_ * num::mills_lower(z(y)); }
  double hazard_plus(double y) const override { return sigma_Y_ * num::mills_upper(z(y)); }
  double hazard_minus_slope(double y) const override {
    const double t = z(y);
    return 1.0 + t * num::mills_lower(t);
  }
  double hazard_plus_slope(double y) const override {
    const double t = z(y);
    return -1.0 + t * num::mills_upper(t);
  }
  bool tail_saturated(double y) const override { return std::abs(z(y)) > 37.0; }

 private:
  double z(double y) const { return (y - mu_Y_) / sigma_Y_; }

  double slope_ = 0.0;
  double intercept_ = 0.0;
};

// Effective-type law obtained by convolving the two densities on a uniform
// grid. Between nodes log f, log F, log Fbar, g, H and Hbar are cubic splines;
// beyond the grid the density is continued with its end log-slope, which makes
// the outer hazard constant.
class NumericLaw final : public TypeLaw {
 public:
  static constexpr int kHalfNodes = 1 << 13;
  static constexpr double kHalfWidth = 12.0;  // in units of the dispersion scale
  static constexpr double kSignalReach = 20.0;

  NumericLaw(const DistributionSpec& spec, double gamma_c) : TypeLaw(spec, gamma_c) {
    std::function<double(double)> log_fS;
    std::function<double(double)> log_fM;
    if (spec.family == Family::two_sided_exponential) {
      const double bS = spec.sigma_S / std::numbers::sqrt2;
      const double bM = spec.sigma_M / std::numbers::sqrt2;
      const double mS = spec.mu_S;
      const double mM = spec.mu_M;
      log_fS = [=](double s) { return -std::abs(s - mS) / bS; };
      log_fM = [=](double m) { return -std::abs(m - mM) / bM; };
    } else {
      if (!spec.log_density_S || !spec.log_density_M)
        throw DomainError("custom_logconcave requires log-densities for S and M");
      check_log_concave(spec.log_density_S, spec.mu_S, spec.sigma_S, "S");
      check_log_concave(spec.log_density_M, spec.mu_M, spec.sigma_M, "M");
      log_fS = spec.log_density_S;
      log_fM = spec.log_density_M;
    }
    build(log_fS, log_fM);
  }

  double pdf(double y) const override {
    if (y < lo_) return std::exp(lf0_ + lamL_ * (y - lo_));
    if (y > hi_) return std::exp(lfN_ + lamR_ * (y - hi_));
    return std::exp(log_f_(y));
  }
  double cdf(double y) const override {
    if (y < lo_) return pdf(y) / lamL_;
    if (y > hi_) return 1.0 - pdf(y) / -lamR_;
    return std::exp(log_F_(y));
  }
  double sf(double y) const override {
    if (y < lo_) return 1.0 - pdf(y) / lamL_;
    if (y > hi_) return pdf(y) / -lamR_;
    return std::exp(log_Fbar_(y));
  }
  double cond_mean(double y) const override {
    if (y < lo_) return g0_ + gL_ * (y - lo_);
    if (y > hi_) return gN_ + gR_ * (y - hi_);
    return g_(y);
  }
  double cond_mean_slope(double y) const override {
    const double h = 1e-5 * sigma_Y_;
    return (cond_mean(y + h) - cond_mean(y - h)) / (2.0 * h);
  }
  double partial_payoff(double y) const override {
    if (y < lo_) return pdf(y) * (cond_mean(y) / lamL_ - gL_ / (lamL_ * lamL_));
    if (y > hi_) return mu_S_ - tail_payoff(y);
    return H_(y);
  }
  double tail_payoff(double y) const override {
    if (y < lo_) return mu_S_ - partial_payoff(y);
    if (y > hi_) {
      const double mu = -lamR_;
      return pdf(y) * (cond_mean(y) / mu + gR_ / (mu * mu));
    }
    return Hbar_(y);
  }
  double hazard_minus(double y) const override {
    if (y < lo_) return 1.0 / lamL_;
    if (y > hi_) return cdf(y) / pdf(y);
    return std::exp(log_F_(y) - log_f_(y));
  }
  double hazard_plus(double y) const override {
    if (y < lo_) return sf(y) / pdf(y);
    if (y > hi_) return 1.0 / -lamR_;
    return std::exp(log_Fbar_(y) - log_f_(y));
  }
  double hazard_minus_slope(double y) const override {
    if (y < lo_) return 0.0;
    if (y > hi_) return 1.0 - lamR_ * hazard_minus(y);
    return hazard_minus(y) * (log_F_.prime(y) - log_f_.prime(y));
  }
  double hazard_plus_slope(double y) const override {
    if (y < lo_) return -1.0 - lamL_ * hazard_plus(y);
    if (y > hi_) return 0.0;
    return hazard_plus(y) * (log_Fbar_.prime(y) - log_f_.prime(y));
  }
  bool tail_saturated(double y) const override { return y < lo_ || y > hi_; }

 private:
  static void check_log_concave(const std::function<double(double)>& log_f, double center,
                                double scale, const char* which) {
    require_positive(scale, "dispersion scale");
    const auto grid = num::linspace(center - kHalfWidth * scale, center + kHalfWidth * scale, 2001);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      values[i] = log_f(grid[i]);
      if (!std::isfinite(values[i]))
        throw DomainError(std::string("density of ") + which + " is not positive on the grid");
    }
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double second = values[i - 1] - 2.0 * values[i] + values[i + 1];
      if (second > 1e-9 * std::max(1.0, std::abs(values[i])))
        throw DomainError(std::string("density of ") + which + " is not log-concave near " +
                          std::to_string(grid[i]));
    }
  }

  void build(const std::function<double(double)>& log_fS,
             const std::function<double(double)>& log_fM) {
    const double gc = gamma_c_;
    const DistributionSpec& sp = spec_;
    const double scale = std::sqrt(sp.sigma_S * sp.sigma_S + gc * gc * sp.sigma_M * sp.sigma_M);
    const int nY = 2 * kHalfNodes + 1;
    const double h = 2.0 * kHalfWidth * scale / (2.0 * kHalfNodes);
    const int kS = static_cast<int>(std::ceil(kSignalReach * scale / h));
    const double center_Y = sp.mu_S - gc * sp.mu_M;

    // Signal on s_k = mu_S + k h, and X = -gamma_c M on x_i = -gamma_c mu_M + i h,
    // so that y_j - s_k always falls on an x node and kinks sit on nodes.
    std::vector<double> fS(2 * kS + 1);
    std::vector<double> logS(fS.size());
    double maxS = -std::numeric_limits<double>::infinity();
    for (int k = -kS; k <= kS; ++k) {
      logS[k + kS] = log_fS(sp.mu_S + k * h);
      maxS = std::max(maxS, logS[k + kS]);
    }
    double ZS = 0.0;
    double ES = 0.0;
    for (int k = -kS; k <= kS; ++k) {
      const double v = std::exp(logS[k + kS] - maxS);
      fS[k + kS] = v;
      ZS += v;
      ES += v * (sp.mu_S + k * h);
    }
    ES /= ZS;

    const int kX = kHalfNodes + kS;
    std::vector<double> fX(2 * kX + 1);
    std::vector<double> logX(fX.size());
    double maxX = -std::numeric_limits<double>::infinity();
    for (int i = -kX; i <= kX; ++i) {
      const double x = -gc * sp.mu_M + i * h;
      logX[i + kX] = log_fM(-x / gc);
      maxX = std::max(maxX, logX[i + kX]);
    }
    double ZX = 0.0;
    double EX = 0.0;
    for (int i = -kX; i <= kX; ++i) {
      const double v = std::exp(logX[i + kX] - maxX);
      fX[i + kX] = v;
      ZX += v;
      EX += v * (-gc * sp.mu_M + i * h);
    }
    EX /= ZX;

    int k_first = 0;
    int k_last = 2 * kS;
    while (k_first < k_last && fS[k_first] < 1e-300) ++k_first;
    while (k_last > k_first && fS[k_last] < 1e-300) --k_last;

    std::vector<double> f(nY), N(nY);
    for (int j = 0; j < nY; ++j) {
      double acc_f = 0.0;
      double acc_n = 0.0;
      for (int kk = k_first; kk <= k_last; ++kk) {
        const int i = (j - kHalfNodes) - (kk - kS);
        const double w = fS[kk] * fX[i + kX];
        acc_f += w;
        acc_n += w * (sp.mu_S + (kk - kS) * h);
      }
      f[j] = acc_f;
      N[j] = acc_n;
    }
    for (int j = 0; j < nY; ++j) {
      if (!(f[j] > 1e-300 * f[kHalfNodes]) || !std::isfinite(f[j]))
        throw DomainError("type density underflows on the convolution grid (domain too wide)");
    }

    lo_ = center_Y - kHalfWidth * scale;
    hi_ = center_Y + kHalfWidth * scale;

    std::vector<double> lf(nY), g(nY), dlf(nY), dN(nY);
    for (int j = 0; j < nY; ++j) {
      lf[j] = std::log(f[j]);
      g[j] = N[j] / f[j];
    }
    for (int j = 0; j < nY; ++j) {
      const int a = std::max(j - 1, 0);
      const int b = std::min(j + 1, nY - 1);
      dlf[j] = (lf[b] - lf[a]) / ((b - a) * h);
      dN[j] = (N[b] - N[a]) / ((b - a) * h);
    }
    lamL_ = (lf[1] - lf[0]) / h;
    lamR_ = (lf[nY - 1] - lf[nY - 2]) / h;
    if (!(lamL_ > 0.0) || !(lamR_ < 0.0))
      throw DomainError("type density does not decay at the ends of the convolution grid");
    gL_ = (g[1] - g[0]) / h;
    gR_ = (g[nY - 1] - g[nY - 2]) / h;

    // Cumulative integrals with the cubic-Hermite end correction.
    auto cell = [h](double v0, double v1, double d0, double d1) {
      return 0.5 * h * (v0 + v1) + h * h / 12.0 * (d0 - d1);
    };
    std::vector<double> F(nY), Fbar(nY), H(nY), Hbar(nY);
    const double muR = -lamR_;
    F[0] = f[0] / lamL_;
    H[0] = f[0] * (g[0] / lamL_ - gL_ / (lamL_ * lamL_));
    for (int j = 1; j < nY; ++j) {
      F[j] = F[j - 1] + cell(f[j - 1], f[j], f[j - 1] * dlf[j - 1], f[j] * dlf[j]);
      H[j] = H[j - 1] + cell(N[j - 1], N[j], dN[j - 1], dN[j]);
    }
    Fbar[nY - 1] = f[nY - 1] / muR;
    Hbar[nY - 1] = f[nY - 1] * (g[nY - 1] / muR + gR_ / (muR * muR));
    for (int j = nY - 2; j >= 0; --j) {
      Fbar[j] = Fbar[j + 1] + cell(f[j], f[j + 1], f[j] * dlf[j], f[j + 1] * dlf[j + 1]);
      Hbar[j] = Hbar[j + 1] + cell(N[j], N[j + 1], dN[j], dN[j + 1]);
    }
    const double Z = F[nY - 1] + Fbar[nY - 1];
    const double logZ = std::log(Z);
    std::vector<double> lF(nY), lFb(nY);
    for (int j = 0; j < nY; ++j) {
      lf[j] -= logZ;
      lF[j] = std::log(F[j] / Z);
      lFb[j] = std::log(Fbar[j] / Z);
      H[j] /= Z;
      Hbar[j] /= Z;
    }
    lf0_ = lf[0];
    lfN_ = lf[nY - 1];
    g0_ = g[0];
    gN_ = g[nY - 1];

    log_f_ = Spline(lf.data(), lf.size(), lo_, h, lamL_, lamR_);
    log_F_ = Spline(lF.data(), lF.size(), lo_, h);
    log_Fbar_ = Spline(lFb.data(), lFb.size(), lo_, h);
    g_ = Spline(g.data(), g.size(), lo_, h, gL_, gR_);
    H_ = Spline(H.data(), H.size(), lo_, h);
    Hbar_ = Spline(Hbar.data(), Hbar.size(), lo_, h);

    mu_S_ = ES;
    mu_Y_ = ES + EX;
    sigma_Y_ = scale;
  }

  double lo_ = 0.0;
  double hi_ = 0.0;
  double lamL_ = 1.0;
  double lamR_ = -1.0;
  double lf0_ = 0.0;
  double lfN_ = 0.0;
  double g0_ = 0.0;
  double gN_ = 0.0;
  double gL_ = 0.0;
  double gR_ = 0.0;
  Spline log_f_, log_F_, log_Fbar_, g_, H_, Hbar_;
};

}  // namespace

Family parse_family(const std::string& name) {
  if (name == "gaussian" || name == "normal") return Family::gaussian;
  if (name == "two_sided_exponential" || name == "laplace") return Family::two_sided_exponential;
  if (name == "custom_logconcave") return Family::custom_logconcave;
  throw DomainError("unknown distribution family '" + name + "'");
}

std::string family_name(Family family) {
  switch (family) {
    case Family::gaussian:
      return "gaussian";
    case Family::two_sided_exponential:
      return "two_sided_exponential";
    case Family::custom_logconcave:
      return "custom_logconcave";
  }
  return "unknown";
}

TypeLawPtr build_typelaw(const DistributionSpec& spec, double gamma_c) {
  require_positive(gamma_c, "gamma_c");
  require_positive(spec.sigma_S, "sigma_S");
  require_positive(spec.sigma_M, "sigma_M");
  if (!std::isfinite(spec.mu_S) || !std::isfinite(spec.mu_M))
    throw DomainError("means must be finite");
  if (spec.family == Family::gaussian) return std::make_shared<GaussianLaw>(spec, gamma_c);
  return std::make_shared<NumericLaw>(spec, gamma_c);
}

DistributionSpec gaussian_with_beta(double beta, double gamma_c, double var_Y, double mu_S,
                                    double mu_M) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
  require_positive(gamma_c, "gamma_c");
  require_positive(var_Y, "type variance");
  DistributionSpec spec;
  spec.family = Family::gaussian;
  spec.mu_S = mu_S;
  spec.mu_M = mu_M;
  spec.sigma_S = std::sqrt(beta * var_Y);
  spec.sigma_M = std::sqrt((1.0 - beta) * var_Y) / gamma_c;
  return spec;
}

EfronReport efron_check(const TypeLaw& law, const std::vector<double>& grid, double tol) {
  EfronReport report;
  if (grid.empty()) throw DomainError("efron_check needs a nonempty grid");
  const double h = 1e-5 * law.scale();
  report.min_slope = std::numeric_limits<double>::infinity();
  report.max_slope = -std::numeric_limits<double>::infinity();
  for (double y : grid) {
    const double slope = (law.cond_mean(y + h) - law.cond_mean(y - h)) / (2.0 * h);
    report.slopes.push_back(slope);
    report.min_slope = std::min(report.min_slope, slope);
    report.max_slope = std::max(report.max_slope, slope);
  }
  report.pass = report.min_slope > tol && report.max_slope < 1.0 - tol;
  return report;
}

}  // namespace dealer
