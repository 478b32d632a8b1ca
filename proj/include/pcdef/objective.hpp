#pragma once

#include <memory>

#include "pcdef/model.hpp"

namespace pcdef {

// Anything that exposes a batched loss over a flat parameter vector.
// Corruption probes, trace estimation and the bound checkers run against this
// interface so toy quadratics and real models share one code path.
class Objective {
public:
  virtual ~Objective() = default;
  virtual std::size_t param_count() const = 0;
  virtual std::size_t batch_count() const = 0;
  virtual double loss(const Vec& params, std::size_t batch) const = 0;
  virtual Vec gradient(const Vec& params, std::size_t batch) const = 0;

  // Mean loss over all batches.
  double mean_loss(const Vec& params) const {
    double s = 0.0;
    for (std::size_t b = 0; b < batch_count(); ++b) s += loss(params, b);
    return s / static_cast<double>(batch_count());
  }
};

// A model evaluated on a fixed list of batches.
class ModelObjective : public Objective {
public:
  ModelObjective(Model model, std::vector<Batch> batches)
      : model_(std::move(model)), batches_(std::move(batches)) {
    if (batches_.empty()) throw invalid_input("ModelObjective: no batches");
  }

  std::size_t param_count() const override { return model_.param_count(); }
  std::size_t batch_count() const override { return batches_.size(); }

  double loss(const Vec& params, std::size_t b) const override {
    return at(params).forward(batches_.at(b)).loss;
  }
  Vec gradient(const Vec& params, std::size_t b) const override {
    return at(params).backward(batches_.at(b));
  }

  const Model& model() const { return model_; }

private:
  Model at(const Vec& params) const {
    Model m = model_;
    m.set_params(params);
    return m;
  }

  Model model_;
  std::vector<Batch> batches_;
};

// L(w) = c + g.w + 1/2 w'Hw with symmetric H, single batch.
class QuadraticObjective : public Objective {
public:
  QuadraticObjective(std::vector<Vec> hessian, Vec linear, double constant = 0.0)
      : h_(std::move(hessian)), g_(std::move(linear)), c_(constant) {
    for (const auto& row : h_)
      if (row.size() != g_.size()) throw invalid_input("QuadraticObjective: H shape");
    if (h_.size() != g_.size()) throw invalid_input("QuadraticObjective: H shape");
  }

  static QuadraticObjective diagonal(Vec diag, Vec linear, double constant = 0.0) {
    std::vector<Vec> h(diag.size(), Vec(diag.size(), 0.0));
    for (std::size_t i = 0; i < diag.size(); ++i) h[i][i] = diag[i];
    return QuadraticObjective(std::move(h), std::move(linear), constant);
  }

  std::size_t param_count() const override { return g_.size(); }
  std::size_t batch_count() const override { return 1; }

  double loss(const Vec& w, std::size_t) const override {
    double s = c_ + dot(g_, w);
    for (std::size_t i = 0; i < w.size(); ++i) s += 0.5 * w[i] * dot(h_[i], w);
    return s;
  }
  Vec gradient(const Vec& w, std::size_t) const override {
    Vec out = g_;
    for (std::size_t i = 0; i < w.size(); ++i) out[i] += dot(h_[i], w);
    return out;
  }

  const std::vector<Vec>& hessian() const { return h_; }

  // Spectral norm of H by power iteration (H is symmetric PSD in our uses).
  double smoothness() const {
    Vec v(g_.size(), 1.0);
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
      Vec hv(v.size(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) hv[i] = dot(h_[i], v);
      double n = l2_norm(hv);
      if (n == 0.0) return 0.0;
      lam = n / l2_norm(v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = hv[i] / n;
    }
    return lam;
  }

private:
  std::vector<Vec> h_;
  Vec g_;
  double c_;
};

}  // namespace pcdef
