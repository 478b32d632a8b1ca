#pragma once

#include <algorithm>
#include <numeric>

#include "pcdef/common.hpp"

namespace pcdef {

// Corruption feasibility region: {a : ||a||_p <= eps, nnz(a) <= n}
// (or the ||a||_p = eps shell when boundary_only).
struct ConstraintSet {
  double p = 2.0;  // norm order, > 1 or +inf (p = 1 accepted as a limit case)
  double epsilon = 0.0;
  std::size_t n = 0;  // max nonzero count
  bool boundary_only = false;

  ConstraintSet() = default;
  ConstraintSet(double p_, double eps, std::size_t n_, bool boundary = false)
      : p(p_), epsilon(eps), n(n_), boundary_only(boundary) {
    if (!(p >= 1.0)) throw invalid_input("ConstraintSet: p must be >= 1 or inf");
    if (eps < 0.0) throw invalid_input("ConstraintSet: epsilon must be nonnegative");
    if (n_ < 1) throw invalid_input("ConstraintSet: n must be >= 1");
  }

  bool contains(const Vec& a, double tol = 1e-12) const {
    if (nnz(a) > n) return false;
    double norm = lp_norm(a, p);
    return boundary_only ? std::abs(norm - epsilon) <= tol : norm <= epsilon + tol;
  }
};

// Keep the n largest-magnitude entries, zero the rest. Ties on |v| keep the
// lowest index.
inline Vec top_n(const Vec& v, std::size_t n) {
  if (n < 1 || n > v.size()) throw invalid_input("top_n: n out of range");
  if (n == v.size()) return v;
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t i, std::size_t j) {
                      double ai = std::abs(v[i]), aj = std::abs(v[j]);
                      return ai != aj ? ai > aj : i < j;
                    });
  Vec out(v.size(), 0.0);
  for (std::size_t t = 0; t < n; ++t) out[idx[t]] = v[idx[t]];
  return out;
}

struct ArgmaxResult {
  Vec a;         // the maximizer, ||a||_p = eps, nnz <= n
  double value;  // a.v = eps * ||top_n(v)||_{p/(p-1)}
};

// Closed-form maximizer of a.v over S. For p = inf the limit form
// eps*sgn(h) on the support of h; for p = 1 all mass on the largest |v|
// coordinate (lowest index on ties).
inline ArgmaxResult constrained_argmax(const Vec& v, const ConstraintSet& S) {
  if (S.epsilon == 0.0) return {Vec(v.size(), 0.0), 0.0};
  Vec h = top_n(v, std::min(S.n, v.size()));
  if (nnz(h) == 0)
    throw degenerate_gradient("constrained_argmax: zero vector on top-n support");

  Vec a(v.size(), 0.0);
  double value = 0.0;
  if (is_inf_order(S.p)) {
    for (std::size_t i = 0; i < h.size(); ++i)
      if (h[i] != 0.0) a[i] = S.epsilon * sgn(h[i]);
    value = S.epsilon * lp_norm(h, 1.0);
  } else if (S.p == 1.0) {
    // Limit of the closed form as p -> 1+: single largest coordinate.
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.size(); ++i)
      if (std::abs(h[i]) > std::abs(h[best])) best = i;
    a[best] = S.epsilon * sgn(h[best]);
    value = S.epsilon * std::abs(h[best]);
  } else {
    double exponent = 1.0 / (S.p - 1.0);
    Vec powed(h.size(), 0.0);
    for (std::size_t i = 0; i < h.size(); ++i)
      if (h[i] != 0.0) powed[i] = std::pow(std::abs(h[i]), exponent);
    double denom = lp_norm(powed, S.p);
    for (std::size_t i = 0; i < h.size(); ++i)
      a[i] = S.epsilon * sgn(h[i]) * powed[i] / denom;
    value = S.epsilon * lp_norm(h, S.p / (S.p - 1.0));
  }
  return {std::move(a), value};
}

// Steepest-ascent step of Lp length alpha: argmax of u.g over ||u||_p = alpha.
inline Vec step_update(const Vec& g, double alpha, double p) {
  if (alpha <= 0.0) throw invalid_input("step_update: alpha must be positive");
  if (nnz(g) == 0) throw degenerate_gradient("step_update: zero gradient");
  ConstraintSet S(p, alpha, g.size(), true);
  return constrained_argmax(g, S).a;
}

// Euclidean projection onto S, closed form for p in {2, inf} only.
inline Vec project(const Vec& x, const ConstraintSet& S) {
  bool p2 = (S.p == 2.0), pinf = is_inf_order(S.p);
  if (!p2 && !pinf)
    throw unsupported_norm("project: closed form exists only for p = 2 or p = inf");
  Vec h = top_n(x, std::min(S.n, x.size()));
  if (p2) {
    double norm = l2_norm(h);
    if (norm == 0.0 || norm <= S.epsilon) return h;
    // Shave the scale by ulps until the result is inside the ball, so a
    // second projection is an exact no-op.
    double scale = S.epsilon / norm;
    Vec y(h.size());
    for (;;) {
      for (std::size_t i = 0; i < h.size(); ++i) y[i] = h[i] * scale;
      if (l2_norm(y) <= S.epsilon) return y;
      scale = std::nextafter(scale, 0.0);
    }
  }
  for (double& v : h) v = std::clamp(v, -S.epsilon, S.epsilon);
  return h;
}

enum class BetaVariant {
  // ||x||_p <= beta * ||x||_2 over R^m: beta = max{1, m^(1/p - 1/2)}.
  LpVsL2,
  // ||x||_2 <= beta * ||x||_r for n-sparse x: beta = max{1, m^(1/2 - 1/r)}.
  L2VsLr,
};

inline double beta_p(double p, std::size_t m, BetaVariant variant = BetaVariant::LpVsL2) {
  if (!(p > 1.0)) throw invalid_input("beta_p: requires p > 1 or p = inf");
  if (m < 1) throw invalid_input("beta_p: m must be >= 1");
  double inv_p = is_inf_order(p) ? 0.0 : 1.0 / p;
  double e = variant == BetaVariant::LpVsL2 ? inv_p - 0.5 : 0.5 - inv_p;
  return std::max(1.0, std::pow(static_cast<double>(m), e));
}

// Exponent g(p) = max{(p-4)/(2p), (1-p)/p} from the error-bound ratio.
inline double g_exponent(double p) {
  if (!(p > 1.0)) throw invalid_input("g_exponent: requires p > 1 or p = inf");
  if (is_inf_order(p)) return 0.5;
  return std::max((p - 4.0) / (2.0 * p), (1.0 - p) / p);
}

}  // namespace pcdef
