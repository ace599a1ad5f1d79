#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dealer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid inputs (parameters outside their domain, bad configuration).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or left its admissible region.
class SolverError : public Error {
 public:
  using Error::Error;
};

namespace num {

double normal_pdf(double z);
double normal_cdf(double z);
double normal_sf(double z);

/// Phi(z)/phi(z), accurate in both tails.
double mills_lower(double z);
/// (1 - Phi(z))/phi(z), accurate in both tails.
double mills_upper(double z);

struct RootResult {
  double x = 0.0;
  bool ok = false;
  int evaluations = 0;
};

/// Solves fn(x) = target for a nondecreasing fn.
///
/// The bracket is found by walking from `guess` with geometrically growing
/// steps (initial size `step`); the root is then polished by a secant iteration
/// that falls back to bisection whenever the secant point leaves the bracket or
/// fn returns a non-finite value. Converges to `xtol` (absolute) or until the
/// bracket collapses to adjacent doubles.
RootResult solve_increasing(const std::function<double(double)>& fn, double target,
                            double guess = 0.0, double step = 1.0, double xtol = 1e-13,
                            int max_expansions = 200);

/// Same as solve_increasing but with a known bracket [lo, hi].
RootResult solve_in_bracket(const std::function<double(double)>& fn, double target, double lo,
                            double hi, double xtol = 1e-13);

/// Adaptive Gauss-Kronrod integral of fn over [a, b].
double integrate(const std::function<double(double)>& fn, double a, double b,
                 double rel_tol = 1e-11, double* error_estimate = nullptr);

/// Evenly spaced grid with `count` points including both ends.
std::vector<double> linspace(double a, double b, std::size_t count);

}  // namespace num
}  // namespace dealer
