#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcdef {

using Vec = std::vector<double>;
using Rng = std::mt19937_64;

// Thrown when an argument violates an operation's precondition.
class invalid_input : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a gradient (or its top-n restriction) is identically zero and
// the requested closed form is undefined.
class degenerate_gradient : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown for projections with a finite norm order other than 2.
class unsupported_norm : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double inf_norm_order = std::numeric_limits<double>::infinity();

inline bool is_inf_order(double p) { return std::isinf(p); }

// Lp norm for p >= 1 or p = +inf.
inline double lp_norm(const Vec& v, double p) {
  if (is_inf_order(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p == 2.0) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  if (p == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

inline double l2_norm(const Vec& v) { return lp_norm(v, 2.0); }

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline std::size_t nnz(const Vec& v) {
  std::size_t c = 0;
  for (double x : v)
    if (x != 0.0) ++c;
  return c;
}

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace pcdef
