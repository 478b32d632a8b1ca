#pragma once

#include <functional>

#include "pcdef/common.hpp"

namespace pcdef {

inline double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// Gauss hypergeometric 2F1 by its defining series. Terminates exactly when a
// or b is a nonpositive integer; otherwise requires |z| < 1.
inline double hyp2f1(double a, double b, double c, double z, double tol = 1e-15,
                     int max_terms = 100000) {
  double term = 1.0, sum = 1.0;
  for (int n = 0; n < max_terms; ++n) {
    double num = (a + n) * (b + n);
    if (num == 0.0) return sum;  // series terminated
    term *= num / (c + n) * z / (n + 1.0);
    sum += term;
    if (std::abs(term) <= tol * std::abs(sum)) return sum;
  }
  throw numerical_error("hyp2f1: series did not converge");
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 50) {
  auto simpson = [&](double lo, double hi) {
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f((lo + hi) / 2.0) + f(hi));
  };
  std::function<double(double, double, double, double, int)> rec =
      [&](double lo, double hi, double whole, double eps, int d) -> double {
    double mid = (lo + hi) / 2.0;
    double left = simpson(lo, mid), right = simpson(mid, hi);
    if (std::abs(left + right - whole) <= 15.0 * eps || d <= 0)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, left, eps / 2.0, d - 1) + rec(mid, hi, right, eps / 2.0, d - 1);
  };
  return rec(a, b, simpson(a, b), tol, depth);
}

// Density of eta = |a.g| / (eps ||g||_2) for a uniform on the L2 sphere in
// dimension k: 2*Gamma(k/2)/(sqrt(pi)*Gamma((k-1)/2)) * (1-x^2)^((k-3)/2).
inline double eta_pdf(double x, std::size_t k) {
  if (x < 0.0 || x > 1.0) throw invalid_input("eta_pdf: x must be in [0, 1]");
  if (k < 2) throw invalid_input("eta_pdf: k must be >= 2");
  double log_coef = std::log(2.0) + std::lgamma(k / 2.0) - 0.5 * std::log(M_PI) -
                    std::lgamma((k - 1) / 2.0);
  double e = (static_cast<double>(k) - 3.0) / 2.0;
  if (x == 1.0) {
    if (e > 0.0) return 0.0;
    if (e == 0.0) return std::exp(log_coef);
    return std::numeric_limits<double>::infinity();  // integrable singularity (k = 2)
  }
  return std::exp(log_coef + e * std::log1p(-x * x));
}

// P(eta <= x). Uses the terminating 2F1 series for odd k; otherwise
// integrates the density with the x = sin(theta) substitution, which removes
// the endpoint singularity.
inline double eta_cdf(double x, std::size_t k) {
  if (x < 0.0 || x > 1.0) throw invalid_input("eta_cdf: x must be in [0, 1]");
  if (k < 2) throw invalid_input("eta_cdf: k must be >= 2");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double b = (3.0 - static_cast<double>(k)) / 2.0;
  bool terminating = (k % 2 == 1);  // b is a nonpositive integer for odd k >= 3
  if (terminating) {
    double v = 2.0 * x * hyp2f1(0.5, b, 1.5, x * x) /
               beta_function((k - 1) / 2.0, 0.5);
    return std::clamp(v, 0.0, 1.0);
  }
  double log_coef = std::log(2.0) + std::lgamma(k / 2.0) - 0.5 * std::log(M_PI) -
                    std::lgamma((k - 1) / 2.0);
  double coef = std::exp(log_coef);
  double kk = static_cast<double>(k);
  auto integrand = [&](double theta) {
    // pdf(sin theta) * cos theta
    return coef * std::pow(std::cos(theta), kk - 2.0);
  };
  double v = adaptive_simpson(integrand, 0.0, std::asin(x), 1e-12);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace pcdef
