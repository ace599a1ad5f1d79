#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dealer {

enum class Family { gaussian, two_sided_exponential, custom_logconcave };

Family parse_family(const std::string& name);
std::string family_name(Family family);

/// Laws of the signal S and the client's inventory M.
///
/// For the built-in families `sigma_S` and `sigma_M` are standard deviations.
/// For `custom_logconcave` the means and sigmas only position and size the
/// numerical grid; the laws themselves come from the two log-densities, which
/// need not be normalized.
struct DistributionSpec {
  Family family = Family::gaussian;
  double mu_S = 0.0;
  double sigma_S = 1.0;
  double mu_M = 0.0;
  double sigma_M = 1.0;
  std::function<double(double)> log_density_S;
  std::function<double(double)> log_density_M;
};

/// Law of the effective type Y = S - gamma_c * M with its derived functionals.
/// Immutable after construction.
class TypeLaw {
 public:
  virtual ~TypeLaw() = default;

  virtual double pdf(double y) const = 0;
  virtual double cdf(double y) const = 0;
  virtual double sf(double y) const = 0;
  /// g(y) = E[S | Y = y].
  virtual double cond_mean(double y) const = 0;
  virtual double cond_mean_slope(double y) const = 0;
  /// H(y) = integral of f*g over (-inf, y].
  virtual double partial_payoff(double y) const = 0;
  /// Hbar(y) = integral of f*g over [y, inf).
  virtual double tail_payoff(double y) const = 0;
  /// F/f.
  virtual double hazard_minus(double y) const = 0;
  /// Fbar/f.
  virtual double hazard_plus(double y) const = 0;
  /// (F/f)'.
  virtual double hazard_minus_slope(double y) const = 0;
  /// (Fbar/f)'.
  virtual double hazard_plus_slope(double y) const = 0;
  /// True where the hazards come from a tail asymptote rather than the body.
  virtual bool tail_saturated(double y) const = 0;

  double mean() const { return mu_Y_; }
  /// Standard deviation for the built-in families, a dispersion scale otherwise.
  double scale() const { return sigma_Y_; }
  double signal_mean() const { return mu_S_; }
  /// Projection coefficient, only defined for the Gaussian family.
  std::optional<double> beta() const { return beta_; }
  double gamma_c() const { return gamma_c_; }
  const DistributionSpec& spec() const { return spec_; }

 protected:
  TypeLaw(DistributionSpec spec, double gamma_c) : spec_(std::move(spec)), gamma_c_(gamma_c) {}

  DistributionSpec spec_;
  double gamma_c_;
  double mu_Y_ = 0.0;
  double sigma_Y_ = 1.0;
  double mu_S_ = 0.0;
  std::optional<double> beta_;
};

using TypeLawPtr = std::shared_ptr<const TypeLaw>;

/// Throws DomainError for invalid parameters, a custom density that fails the
/// log-concavity spot check, or a convolution grid on which the density underflows.
TypeLawPtr build_typelaw(const DistributionSpec& spec, double gamma_c);

/// Gaussian spec with prescribed projection coefficient and type variance.
/// sigma_S^2 = beta * var_Y and sigma_M^2 = (1 - beta) * var_Y / gamma_c^2.
DistributionSpec gaussian_with_beta(double beta, double gamma_c, double var_Y = 2.0,
                                    double mu_S = 0.0, double mu_M = 0.0);

struct EfronReport {
  double min_slope = 0.0;
  double max_slope = 0.0;
  std::vector<double> slopes;
  bool pass = false;
};

/// Central finite-difference estimates of g' on the grid; passes when all lie
/// in (tol, 1 - tol).
EfronReport efron_check(const TypeLaw& law, const std::vector<double>& grid, double tol = 0.0);

}  // namespace dealer
