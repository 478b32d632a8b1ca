#pragma once

#include "pcdef/objective.hpp"

namespace pcdef {

struct TraceEstimate {
  double trace = 0.0;
  double std_err = 0.0;
  std::size_t probes = 0;
};

// Hutchinson estimator of tr(H) with Rademacher probes. Hessian-vector
// products use central finite differences of the gradient (step 1e-4); the
// Hessian itself is never materialized.
inline TraceEstimate hessian_trace_estimate(const Objective& obj, const Vec& params,
                                            std::size_t probes, std::uint64_t seed,
                                            double fd_step = 1e-4) {
  if (probes < 1) throw invalid_input("hessian_trace_estimate: probes must be >= 1");
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  double sum = 0.0, sum_sq = 0.0;
  Vec z(params.size()), plus(params.size()), minus(params.size());
  for (std::size_t t = 0; t < probes; ++t) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = coin(rng) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      plus[i] = params[i] + fd_step * z[i];
      minus[i] = params[i] - fd_step * z[i];
    }
    double acc = 0.0;
    for (std::size_t b = 0; b < obj.batch_count(); ++b) {
      Vec gp = obj.gradient(plus, b);
      Vec gm = obj.gradient(minus, b);
      // z' H z averaged over batches.
      double s = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * (gp[i] - gm[i]) / (2.0 * fd_step);
      acc += s;
    }
    acc /= static_cast<double>(obj.batch_count());
    if (!std::isfinite(acc)) throw numerical_error("hessian_trace_estimate: non-finite probe");
    sum += acc;
    sum_sq += acc * acc;
  }
  TraceEstimate est;
  est.probes = probes;
  est.trace = sum / static_cast<double>(probes);
  if (probes > 1) {
    double var = (sum_sq - sum * sum / static_cast<double>(probes)) /
                 static_cast<double>(probes - 1);
    est.std_err = std::sqrt(std::max(0.0, var) / static_cast<double>(probes));
  }
  return est;
}

inline TraceEstimate hessian_trace_estimate(const Model& model, const Batch& batch,
                                            std::size_t probes, std::uint64_t seed) {
  ModelObjective obj(model, {batch});
  return hessian_trace_estimate(obj, model.params(), probes, seed);
}

}  // namespace pcdef
