#pragma once

#include <chrono>
#include <optional>

#include "pcdef/corruption.hpp"

namespace pcdef {

class diverged_training : public std::runtime_error {
public:
  diverged_training(std::size_t epoch, std::size_t step)
      : std::runtime_error("training diverged (non-finite loss) at epoch " +
                          std::to_string(epoch) + ", step " + std::to_string(step)),
        epoch(epoch), step(step) {}
  std::size_t epoch;
  std::size_t step;
};

enum class DefenseVariant { Baseline, MultiStepAvg, Acrt, Sam, Awp };

struct AwpConfig {
  std::size_t inner_K = 1;
  double input_eps = 0.0;
};

struct DefenseConfig {
  std::size_t K = 1;
  double epsilon = 0.0;
  double p = inf_norm_order;
  std::size_t n = 0;  // 0 means unrestricted (n = k)
  double alpha = 0.0; // 0 means the default 1.5 * eps / K
  std::size_t start_epoch = 0;
  DefenseVariant variant = DefenseVariant::MultiStepAvg;
  double alpha_mix = 1.0;      // ACRT mixing weight; SAM is alpha_mix = 1
  bool substitutive = false;   // ACRT first-order substitutive loss
  AwpConfig awp;
  bool random_init = false;    // initialize a_0 on the eps shell instead of 0
  std::optional<ParamPartition> partition;  // empty = all parameters corruptible

  double effective_alpha() const {
    if (alpha > 0.0) return alpha;
    return 1.5 * epsilon / static_cast<double>(std::max<std::size_t>(K, 1));
  }
  ConstraintSet constraint(std::size_t k) const {
    return ConstraintSet(p, epsilon, n == 0 ? k : n);
  }
  ParamPartition partition_for(std::size_t k_total) const {
    return partition ? *partition : ParamPartition::all(k_total);
  }
};

// Peak count of simultaneously live gradient-sized buffers inside the
// multi-step objective, for the memory-contract check.
struct GradBufferStats {
  static inline int live = 0;
  static inline int peak = 0;
  static void reset() { live = peak = 0; }
  static void acquire() { peak = std::max(peak, ++live); }
  static void release() { --live; }
};

struct DefenseObjective {
  double objective = 0.0;
  Vec grad;                 // full-length averaged gradient
  std::vector<double> losses;  // K+1 per-point losses
  std::size_t steps_skipped = 0;
};

// Eq-22-style averaged multi-step objective on one batch: generate
// a_1..a_K from gradients at w + a_{k-1}, average the K+1 losses and the
// K+1 full-parameter gradients. Only the running sum and the current
// gradient are alive at any time.
inline DefenseObjective defense_objective_grad(const Model& model, const Batch& batch,
                                               const DefenseConfig& cfg,
                                               std::uint64_t init_seed = 0) {
  std::size_t k_total = model.param_count();
  ParamPartition part = cfg.partition_for(k_total);
  std::size_t k = part.k();
  ConstraintSet S = cfg.constraint(k);
  std::size_t K = cfg.K;
  double alpha = cfg.effective_alpha();

  DefenseObjective out;
  if (K == 0) {
    // Degenerate case: exactly the plain loss and gradient.
    out.objective = model.forward(batch).loss;
    out.grad = model.backward(batch);
    out.losses = {out.objective};
    return out;
  }

  Vec a(k, 0.0);
  if (cfg.random_init && cfg.epsilon > 0.0) {
    if (is_inf_order(cfg.p)) {
      Rng rng(init_seed);
      std::uniform_real_distribution<double> u(-cfg.epsilon, cfg.epsilon);
      double mx = 0.0;
      for (double& x : a) {
        x = u(rng);
        mx = std::max(mx, std::abs(x));
      }
      if (mx > 0.0)
        for (double& x : a) x *= cfg.epsilon / mx;
    } else {
      a = sample_sphere(k, cfg.epsilon, 1, init_seed)[0];
    }
  }

  GradBufferStats::reset();
  Vec accum(k_total, 0.0);
  GradBufferStats::acquire();  // the partial sum
  double loss_sum = 0.0;
  Model point = model;
  for (std::size_t step = 0; step <= K; ++step) {
    point = model.corrupted(a, part);
    double loss = point.forward(batch).loss;
    if (!std::isfinite(loss)) throw numerical_error("defense objective: non-finite loss");
    out.losses.push_back(loss);
    loss_sum += loss;

    Vec grad = point.backward(batch);
    GradBufferStats::acquire();  // the current gradient
    for (std::size_t i = 0; i < k_total; ++i) accum[i] += grad[i];

    if (step < K && cfg.epsilon > 0.0) {
      Vec g = gather_corruptible(grad, part);
      if (nnz(g) == 0) {
        ++out.steps_skipped;  // a_{k+1} repeats a_k
      } else {
        Vec u = step_update(g, alpha, S.p);
        for (std::size_t i = 0; i < k; ++i) a[i] += u[i];
        a = project(a, S);
      }
    }
    GradBufferStats::release();
  }
  GradBufferStats::release();

  double inv = 1.0 / static_cast<double>(K + 1);
  out.objective = loss_sum * inv;
  for (double& gi : accum) gi *= inv;
  out.grad = std::move(accum);
  return out;
}

// FGSM input perturbation: x' = x + eps * sgn(dL/dx), targets unchanged.
inline Batch fgsm_batch(const Model& model, const Batch& batch, double input_eps) {
  if (input_eps < 0.0) throw invalid_input("fgsm_batch: input_eps must be >= 0");
  if (input_eps == 0.0) return batch;
  BackwardResult bw = model.backward_full(batch);
  Batch out = batch;
  for (std::size_t i = 0; i < out.inputs.values.size(); ++i)
    out.inputs.values[i] += input_eps * sgn(bw.input_grad.values[i]);
  return out;
}

// ACRT mixed objective (SAM = alpha_mix 1): (1-m) L(w) + m L(w + a_hat) with
// a_hat the closed-form gradient corruption on this batch. The corruption is
// treated as constant when differentiating, as in SAM.
inline DefenseObjective acrt_objective_grad(const Model& model, const Batch& batch,
                                            const DefenseConfig& cfg) {
  if (cfg.alpha_mix < 0.0 || cfg.alpha_mix > 1.0)
    throw invalid_input("acrt: alpha_mix must be in [0, 1]");
  DefenseObjective out;
  if (cfg.alpha_mix == 0.0 || cfg.epsilon == 0.0) {
    out.objective = model.forward(batch).loss;
    out.grad = model.backward(batch);
    out.losses = {out.objective};
    return out;
  }
  std::size_t k_total = model.param_count();
  ParamPartition part = cfg.partition_for(k_total);
  ConstraintSet S = cfg.constraint(part.k());

  double clean_loss = model.forward(batch).loss;
  Vec clean_grad = model.backward(batch);
  GradientCorruption gc = gradient_corruption(model, batch, S, part);
  if (gc.degenerate) {
    out.objective = clean_loss;
    out.grad = std::move(clean_grad);
    out.losses = {clean_loss};
    return out;
  }
  Model shifted = model.corrupted(gc.a, part);
  double shifted_loss = shifted.forward(batch).loss;
  Vec shifted_grad = shifted.backward(batch);

  double m = cfg.alpha_mix;
  if (cfg.substitutive) {
    // First-order substitute: L(w) + m * a_hat . grad L(w).
    out.objective = clean_loss + m * gc.first_order_value;
  } else {
    out.objective = (1.0 - m) * clean_loss + m * shifted_loss;
  }
  out.grad.resize(k_total);
  for (std::size_t i = 0; i < k_total; ++i)
    out.grad[i] = (1.0 - m) * clean_grad[i] + m * shifted_grad[i];
  out.losses = {clean_loss, shifted_loss};
  return out;
}

// AWP: FGSM-perturbed batch, then an inner_K-step PGD virtual corruption on
// that batch; objective and gradient are taken at w + a.
inline DefenseObjective awp_objective_grad(const Model& model, const Batch& batch,
                                           const DefenseConfig& cfg) {
  if (cfg.awp.inner_K < 1) throw invalid_input("awp: inner_K must be >= 1");
  Batch adv = fgsm_batch(model, batch, cfg.awp.input_eps);
  std::size_t k_total = model.param_count();
  ParamPartition part = cfg.partition_for(k_total);
  std::size_t k = part.k();
  ConstraintSet S = cfg.constraint(k);
  double alpha = cfg.alpha > 0.0
                     ? cfg.alpha
                     : 1.5 * cfg.epsilon / static_cast<double>(cfg.awp.inner_K);

  Vec a(k, 0.0);
  DefenseObjective out;
  if (cfg.epsilon > 0.0) {
    for (std::size_t step = 0; step < cfg.awp.inner_K; ++step) {
      Model point = model.corrupted(a, part);
      Vec g = gather_corruptible(point.backward(adv), part);
      if (nnz(g) == 0) {
        ++out.steps_skipped;
        continue;
      }
      Vec u = step_update(g, alpha, S.p);
      for (std::size_t i = 0; i < k; ++i) a[i] += u[i];
      a = project(a, S);
    }
  }
  Model point = model.corrupted(a, part);
  out.objective = point.forward(adv).loss;
  out.grad = point.backward(adv);
  out.losses = {out.objective};
  return out;
}

struct SgdSpec {
  double lr = 0.1;
  double momentum = 0.0;
  double weight_decay = 0.0;
};

struct EpochStats {
  double clean_loss = 0.0;
  double clean_accuracy = 0.0;  // NaN for regression heads
  double defense_objective = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_seconds = 0.0;
};

inline double batch_accuracy(const Model& model, const std::vector<Batch>& batches) {
  if (model.head() != Head::SoftmaxCrossEntropy)
    return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0, total = 0;
  for (const Batch& b : batches) {
    Tensor out = model.forward(b).outputs;
    for (std::size_t r = 0; r < b.size(); ++r) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < out.cols(); ++c)
        if (out.at(r, c) > out.at(r, best)) best = c;
      if (static_cast<int>(best) == b.labels[r]) ++correct;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

inline double mean_loss(const Model& model, const std::vector<Batch>& batches) {
  double s = 0.0;
  for (const Batch& b : batches) s += model.forward(b).loss;
  return s / static_cast<double>(batches.size());
}

// Alg.-1 training loop: SGD on the configured objective, with the defense
// disabled (K = 0) before start_epoch. Deterministic for a fixed seed.
inline std::pair<Model, TrainReport> train(Model model, std::vector<Batch> batches,
                                           const DefenseConfig& cfg, const SgdSpec& opt,
                                           std::size_t epochs, std::uint64_t seed) {
  if (epochs < 1) throw invalid_input("train: epochs must be >= 1");
  if (batches.empty()) throw invalid_input("train: no batches");
  auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  Rng rng(seed);
  Vec velocity(model.param_count(), 0.0);
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    bool active = epoch >= cfg.start_epoch && cfg.variant != DefenseVariant::Baseline &&
                  !(cfg.variant == DefenseVariant::MultiStepAvg && cfg.K == 0);
    double obj_sum = 0.0;
    for (std::size_t si = 0; si < order.size(); ++si) {
      const Batch& batch = batches[order[si]];
      DefenseObjective step;
      if (!active) {
        DefenseConfig plain = cfg;
        plain.K = 0;
        step = defense_objective_grad(model, batch, plain);
      } else {
        switch (cfg.variant) {
          case DefenseVariant::MultiStepAvg:
            step = defense_objective_grad(model, batch, cfg, rng());
            break;
          case DefenseVariant::Acrt:
            step = acrt_objective_grad(model, batch, cfg);
            break;
          case DefenseVariant::Sam: {
            DefenseConfig sam = cfg;
            sam.alpha_mix = 1.0;
            step = acrt_objective_grad(model, batch, sam);
            break;
          }
          case DefenseVariant::Awp:
            step = awp_objective_grad(model, batch, cfg);
            break;
          case DefenseVariant::Baseline:
            break;  // unreachable
        }
      }
      if (!std::isfinite(step.objective)) throw diverged_training(epoch, si);
      obj_sum += step.objective;

      Vec params = model.params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        double g = step.grad[i] + opt.weight_decay * params[i];
        if (opt.momentum != 0.0) {
          velocity[i] = opt.momentum * velocity[i] + g;
          g = velocity[i];
        }
        params[i] -= opt.lr * g;
      }
      model.set_params(std::move(params));
    }
    EpochStats st;
    st.clean_loss = mean_loss(model, batches);
    st.clean_accuracy = batch_accuracy(model, batches);
    st.defense_objective = obj_sum / static_cast<double>(batches.size());
    if (!std::isfinite(st.clean_loss)) throw diverged_training(epoch, batches.size());
    report.epochs.push_back(st);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(model), std::move(report)};
}

}  // namespace pcdef
