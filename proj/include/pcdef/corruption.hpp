#pragma once

#include "pcdef/constraints.hpp"
#include "pcdef/hessian.hpp"
#include "pcdef/objective.hpp"
#include "pcdef/special.hpp"

namespace pcdef {

// ---------------------------------------------------------------------------
// Random corruption samplers
// ---------------------------------------------------------------------------

// Uniform samples on the sphere {||a||_2 = eps}: normalized Gaussian vectors.
inline std::vector<Vec> sample_sphere(std::size_t k, double eps, std::size_t count,
                                      std::uint64_t seed) {
  if (k < 2) throw invalid_input("sample_sphere: k must be >= 2");
  if (eps <= 0.0) throw invalid_input("sample_sphere: eps must be positive");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Vec a(k);
    double norm;
    do {
      for (double& x : a) x = normal(rng);
      norm = l2_norm(a);
    } while (norm == 0.0);
    for (double& x : a) x *= eps / norm;
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<Vec> sample_gaussian(std::size_t k, double sigma, std::size_t count,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> out(count, Vec(k, 0.0));
  for (auto& a : out)
    for (double& x : a) x = sigma == 0.0 ? 0.0 : sigma * normal(rng);
  return out;
}

inline std::vector<Vec> sample_uniform(std::size_t k, double b, std::size_t count,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-b, b);
  std::vector<Vec> out(count, Vec(k, 0.0));
  for (auto& a : out)
    for (double& x : a) x = b == 0.0 ? 0.0 : u(rng);
  return out;
}

// Normalized alignment of a corruption with the gradient, in [0, 1].
inline double eta_statistic(const Vec& a, const Vec& g, double eps) {
  double gn = l2_norm(g);
  if (gn == 0.0) throw invalid_input("eta_statistic: zero gradient");
  return std::clamp(std::abs(dot(a, g)) / (eps * gn), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Gradient-based corruption (single step, closed form)
// ---------------------------------------------------------------------------

struct GradientCorruption {
  Vec a;                           // corruptible-length corruption
  double first_order_value = 0.0;  // eps * ||top_n(g)||_{p/(p-1)}
  bool degenerate = false;         // gradient was zero on its top-n support
};

// Mean gradient over the objective's batches, restricted to corruptible
// coordinates, evaluated at `params`.
inline Vec masked_mean_gradient(const Objective& obj, const Vec& params,
                                const ParamPartition& part) {
  Vec g(params.size(), 0.0);
  for (std::size_t b = 0; b < obj.batch_count(); ++b) {
    Vec gb = obj.gradient(params, b);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gb[i];
  }
  for (double& x : g) x /= static_cast<double>(obj.batch_count());
  return gather_corruptible(g, part);
}

inline GradientCorruption gradient_corruption(const Objective& obj, const Vec& params,
                                              const ConstraintSet& S,
                                              const ParamPartition& part) {
  Vec g = masked_mean_gradient(obj, params, part);
  GradientCorruption out;
  try {
    ArgmaxResult r = constrained_argmax(g, S);
    out.a = std::move(r.a);
    out.first_order_value = r.value;
  } catch (const degenerate_gradient&) {
    out.a.assign(g.size(), 0.0);
    out.degenerate = true;
  }
  return out;
}

inline GradientCorruption gradient_corruption(const Model& model, const Batch& batch,
                                              const ConstraintSet& S,
                                              const ParamPartition& part) {
  ModelObjective obj(model, {batch});
  return gradient_corruption(obj, model.params(), S, part);
}

// ---------------------------------------------------------------------------
// Multi-step corruption (projected gradient ascent on the corruption)
// ---------------------------------------------------------------------------

struct CorruptionStep {
  Vec a;                  // corruption after this step (corruptible-length)
  double loss = 0.0;      // loss at w + a on the step's batch
  std::size_t batch_index = 0;
  bool skipped = false;   // degenerate gradient, corruption unchanged
};

struct CorruptionTrace {
  std::vector<CorruptionStep> steps;
  Vec final;                   // a_K
  double baseline_loss = 0.0;  // mean loss at a = 0 over all batches
  double final_loss = 0.0;     // mean loss at a_K over all batches
  double epsilon = 0.0;
  double p = 2.0;
  std::size_t n = 0;
  double alpha = 0.0;
  std::size_t K = 0;
  bool budget_warning = false;  // K*alpha < eps

  double loss_change() const { return final_loss - baseline_loss; }
};

// a_k = Pi_S(a_{k-1} + u_k), u_k the alpha-length steepest ascent step on the
// gradient at w + a_{k-1}, batches visited in seeded shuffled order.
inline CorruptionTrace multi_step_corrupt(const Objective& obj, const Vec& params,
                                          const ConstraintSet& S, std::size_t K,
                                          double alpha, const ParamPartition& part,
                                          std::uint64_t seed) {
  if (K < 1) throw invalid_input("multi_step_corrupt: K must be >= 1");
  if (alpha <= 0.0) throw invalid_input("multi_step_corrupt: alpha must be positive");
  std::size_t k = part.k();
  if (k == 0) throw invalid_input("multi_step_corrupt: empty corruptible partition");

  CorruptionTrace trace;
  trace.epsilon = S.epsilon;
  trace.p = S.p;
  trace.n = S.n;
  trace.alpha = alpha;
  trace.K = K;
  trace.budget_warning = static_cast<double>(K) * alpha < S.epsilon;
  trace.baseline_loss = obj.mean_loss(params);

  Rng rng(seed);
  std::vector<std::size_t> order(obj.batch_count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  Vec a(k, 0.0);
  Vec point = params;
  for (std::size_t step = 0; step < K; ++step) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    std::size_t bi = order[cursor++];

    point = params;
    scatter_add(point, a, part);
    Vec g = gather_corruptible(obj.gradient(point, bi), part);

    CorruptionStep rec;
    rec.batch_index = bi;
    if (S.epsilon == 0.0 || nnz(g) == 0) {
      rec.skipped = (S.epsilon != 0.0);
    } else {
      Vec u = step_update(g, alpha, S.p);
      for (std::size_t i = 0; i < k; ++i) a[i] += u[i];
      a = project(a, S);
    }
    rec.a = a;
    point = params;
    scatter_add(point, a, part);
    rec.loss = obj.loss(point, bi);
    trace.steps.push_back(std::move(rec));
  }
  trace.final = a;
  point = params;
  scatter_add(point, a, part);
  trace.final_loss = obj.mean_loss(point);
  return trace;
}

inline CorruptionTrace multi_step_corrupt(const Model& model, std::vector<Batch> data,
                                          const ConstraintSet& S, std::size_t K,
                                          double alpha, const ParamPartition& part,
                                          std::uint64_t seed) {
  ModelObjective obj(model, std::move(data));
  return multi_step_corrupt(obj, model.params(), S, K, alpha, part, seed);
}

// ---------------------------------------------------------------------------
// Loss-change indicators
// ---------------------------------------------------------------------------

enum class IndicatorKind {
  DeltaAveMc,
  DeltaAvePredicted,
  DeltaMaxMultistep,
  DeltaMaxFirstOrder,
};

struct IndicatorEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t samples = 0;
  IndicatorKind kind = IndicatorKind::DeltaAveMc;
  bool degenerate = false;
};

// Monte Carlo estimate of the average loss change over the sphere
// {||a||_2 = eps} in the corruptible subspace.
inline IndicatorEstimate estimate_delta_ave(const Objective& obj, const Vec& params,
                                            double eps, const ParamPartition& part,
                                            std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw invalid_input("estimate_delta_ave: samples must be >= 2");
  std::size_t k = part.k();
  double base = obj.mean_loss(params);
  double sum = 0.0, sum_sq = 0.0;
  if (eps == 0.0) {
    return {0.0, 0.0, samples, IndicatorKind::DeltaAveMc, false};
  }
  auto draws = sample_sphere(k, eps, samples, seed);
  for (const Vec& a : draws) {
    Vec point = params;
    scatter_add(point, a, part);
    double d = obj.mean_loss(point) - base;
    sum += d;
    sum_sq += d * d;
  }
  IndicatorEstimate est;
  est.kind = IndicatorKind::DeltaAveMc;
  est.samples = samples;
  est.mean = sum / static_cast<double>(samples);
  double var = (sum_sq - sum * sum / static_cast<double>(samples)) /
               static_cast<double>(samples - 1);
  est.std_err = std::sqrt(std::max(0.0, var) / static_cast<double>(samples));
  return est;
}

// Second-order prediction tr(H) * eps^2 / (2k).
inline double predict_delta_ave(double trace_est, std::size_t k, double eps) {
  if (k < 1) throw invalid_input("predict_delta_ave: k must be >= 1");
  return trace_est * eps * eps / (2.0 * static_cast<double>(k));
}

// First-order maximum loss change: the dual-norm value of the gradient-based
// corruption (eps * ||g||_2 on the full L2 sphere).
inline IndicatorEstimate estimate_delta_max_first_order(const Objective& obj,
                                                        const Vec& params,
                                                        const ConstraintSet& S,
                                                        const ParamPartition& part) {
  GradientCorruption gc = gradient_corruption(obj, params, S, part);
  IndicatorEstimate est;
  est.kind = IndicatorKind::DeltaMaxFirstOrder;
  est.samples = 1;
  est.mean = gc.degenerate ? 0.0 : gc.first_order_value;
  est.degenerate = gc.degenerate;
  return est;
}

// Empirical lower bound via the multi-step probe.
inline IndicatorEstimate estimate_delta_max_multi_step(const Objective& obj,
                                                       const Vec& params,
                                                       const ConstraintSet& S,
                                                       std::size_t K, double alpha,
                                                       const ParamPartition& part,
                                                       std::uint64_t seed) {
  CorruptionTrace tr = multi_step_corrupt(obj, params, S, K, alpha, part, seed);
  IndicatorEstimate est;
  est.kind = IndicatorKind::DeltaMaxMultistep;
  est.samples = 1;
  est.mean = tr.loss_change();
  return est;
}

// ---------------------------------------------------------------------------
// Error-bound ratio checker (convex quadratics, brute-force oracle, k <= 3)
// ---------------------------------------------------------------------------

struct ErrorBoundReport {
  double delta_max = 0.0;      // grid-search maximum of the true loss change
  double delta_hat = 0.0;      // true loss change at the gradient-based corruption
  double first_order = 0.0;    // eps * ||top_n(g)||_{p/(p-1)}
  double ratio = 1.0;          // delta_max / first_order
  double big_o_constant = 0.0; // (ratio - 1) * G / (L * n^g(p) * sqrt(k) * eps)
};

namespace detail {

// Enumerate directions on the unit L2 sphere of dimension s (s <= 3) with
// angular step `res`, map onto the Lp sphere of radius eps, evaluate f and
// return the maximum. A local refinement pass sharpens the winner.
template <typename F>
double lp_sphere_grid_max(std::size_t s, double p, double eps, double res, F&& f) {
  auto eval_dir = [&](Vec d) {
    double n = lp_norm(d, p);
    if (n == 0.0) return -std::numeric_limits<double>::infinity();
    for (double& x : d) x *= eps / n;
    return f(d);
  };
  double best = -std::numeric_limits<double>::infinity();
  Vec best_angles;
  auto consider = [&](const Vec& angles, const Vec& d) {
    double v = eval_dir(d);
    if (v > best) {
      best = v;
      best_angles = angles;
    }
  };
  auto dir_of = [&](const Vec& angles) {
    if (s == 1) return Vec{std::cos(angles[0])};  // +1 / -1 via theta in {0, pi}
    if (s == 2) return Vec{std::cos(angles[0]), std::sin(angles[0])};
    return Vec{std::cos(angles[0]),
               std::sin(angles[0]) * std::cos(angles[1]),
               std::sin(angles[0]) * std::sin(angles[1])};
  };
  auto scan = [&](const Vec& lo, const Vec& hi, double step) {
    if (s == 1) {
      consider({0.0}, dir_of({0.0}));
      consider({M_PI}, dir_of({M_PI}));
      return;
    }
    if (s == 2) {
      for (double t = lo[0]; t <= hi[0] + step / 2; t += step)
        consider({t}, dir_of({t}));
      return;
    }
    for (double t0 = lo[0]; t0 <= hi[0] + step / 2; t0 += step)
      for (double t1 = lo[1]; t1 <= hi[1] + step / 2; t1 += step)
        consider({t0, t1}, dir_of({t0, t1}));
  };

  Vec lo(s >= 3 ? 2 : 1, 0.0);
  Vec hi = (s >= 3) ? Vec{M_PI, 2.0 * M_PI} : Vec{2.0 * M_PI};
  scan(lo, hi, res);
  if (s >= 2) {
    double step = res;
    for (int round = 0; round < 12; ++round) {
      Vec nlo = best_angles, nhi = best_angles;
      for (std::size_t i = 0; i < nlo.size(); ++i) {
        nlo[i] -= step;
        nhi[i] += step;
      }
      step /= 5.0;
      scan(nlo, nhi, step);
    }
  }
  return best;
}

}  // namespace detail

// Thm-2-style ratio check on an exact convex quadratic. The oracle maximizes
// the true loss change over S by direction-grid search with refinement,
// independently of the closed forms it validates.
inline ErrorBoundReport error_bound_ratio(const QuadraticObjective& q,
                                          const ConstraintSet& S,
                                          double oracle_resolution = 1e-3) {
  std::size_t k = q.param_count();
  if (k > 3) throw invalid_input("error_bound_ratio: oracle supports k <= 3 only");
  Vec w0(k, 0.0);
  double base = q.loss(w0, 0);
  Vec g = q.gradient(w0, 0);
  double G = l2_norm(g);
  if (G <= 0.0) throw invalid_input("error_bound_ratio: zero gradient (G must be > 0)");

  auto loss_change = [&](const Vec& a) { return q.loss(a, 0) - base; };

  // Grid search per support subset of size <= n.
  std::size_t n = std::min(S.n, k);
  double delta_max = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> all_idx(k);
  std::iota(all_idx.begin(), all_idx.end(), 0);
  for (std::size_t mask = 1; mask < (std::size_t(1) << k); ++mask) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (std::size_t(1) << i)) support.push_back(i);
    if (support.size() > n) continue;
    double m = detail::lp_sphere_grid_max(
        support.size(), S.p, S.epsilon, oracle_resolution, [&](const Vec& sub) {
          Vec a(k, 0.0);
          for (std::size_t i = 0; i < support.size(); ++i) a[support[i]] = sub[i];
          return loss_change(a);
        });
    delta_max = std::max(delta_max, m);
  }

  ArgmaxResult am = constrained_argmax(g, S);
  ErrorBoundReport rep;
  rep.delta_max = delta_max;
  rep.delta_hat = loss_change(am.a);
  rep.first_order = am.value;
  rep.ratio = delta_max / am.value;
  if (rep.ratio < 1.0 - 1e-6)
    throw numerical_error("error_bound_ratio: oracle grid too coarse (ratio < 1 - 1e-6)");
  double L = q.smoothness();
  if (L > 0.0) {
    rep.big_o_constant = (rep.ratio - 1.0) * G /
                         (L * std::pow(static_cast<double>(std::min(S.n, k)), g_exponent(S.p)) *
                          std::sqrt(static_cast<double>(k)) * S.epsilon);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// PAC-Bayes constant evaluation
// ---------------------------------------------------------------------------

struct PacBayesBound {
  double C = 0.0;  // the KL constant (C or C1)
  double R = 0.0;  // sqrt((C + log(|D|/delta)) / (2(|D|-1))); o(eps^2) not computed
};

// Sphere case {||a||_2 = eps}: C = (eps^2 + ||w||^2)/(2 sigma^2) - k/2
//                                  + (k/2) log(k sigma^2 / eps^2).
inline PacBayesBound pac_bayes_bound_sphere(double w_norm2, std::size_t k, double eps,
                                            double sigma, std::size_t dataset_size,
                                            double delta) {
  if (sigma <= 0.0 || eps <= 0.0) throw invalid_input("pac_bayes_bound: sigma, eps > 0");
  if (dataset_size < 2) throw invalid_input("pac_bayes_bound: dataset_size >= 2");
  if (delta <= 0.0 || delta >= 1.0) throw invalid_input("pac_bayes_bound: 0 < delta < 1");
  double kk = static_cast<double>(k);
  PacBayesBound b;
  b.C = (eps * eps + w_norm2 * w_norm2) / (2.0 * sigma * sigma) - kk / 2.0 +
        kk / 2.0 * std::log(kk * sigma * sigma / (eps * eps));
  double D = static_cast<double>(dataset_size);
  b.R = std::sqrt((b.C + std::log(D / delta)) / (2.0 * (D - 1.0)));
  return b;
}

// General Lp-ball case via beta_p = max{1, k^(1/p - 1/2)}.
inline PacBayesBound pac_bayes_bound_lp(double w_norm2, std::size_t k, double eps,
                                        double sigma, std::size_t dataset_size,
                                        double delta, double p) {
  if (sigma <= 0.0 || eps <= 0.0) throw invalid_input("pac_bayes_bound: sigma, eps > 0");
  if (dataset_size < 2) throw invalid_input("pac_bayes_bound: dataset_size >= 2");
  if (delta <= 0.0 || delta >= 1.0) throw invalid_input("pac_bayes_bound: 0 < delta < 1");
  double beta = beta_p(p, k);
  double b2 = beta * beta;
  double kk = static_cast<double>(k);
  PacBayesBound b;
  b.C = (eps * eps + b2 * w_norm2 * w_norm2) / (2.0 * b2 * sigma * sigma) - kk / 2.0 +
        kk / 2.0 * std::log(kk * sigma * sigma * b2 / (eps * eps));
  double D = static_cast<double>(dataset_size);
  b.R = std::sqrt((b.C + std::log(D / delta)) / (2.0 * (D - 1.0)));
  return b;
}

}  // namespace pcdef
