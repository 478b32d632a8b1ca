#pragma once

#include <algorithm>
#include <cmath>

#include "pcdef/tensor.hpp"

namespace pcdef {

enum class Activation { Relu, Tanh, Identity };
enum class Head { SoftmaxCrossEntropy, MeanSquaredError };

struct LayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::Identity;
};

// One batch of examples. `labels` is read for classification heads,
// `targets` for regression heads.
struct Batch {
  Tensor inputs;
  std::vector<int> labels;
  Tensor targets;

  std::size_t size() const { return inputs.rows(); }
};

// Corruptible/frozen split of the flat parameter vector (true = corruptible).
struct ParamPartition {
  std::vector<bool> mask;

  std::size_t k() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  }
  static ParamPartition all(std::size_t n) { return {std::vector<bool>(n, true)}; }
  static ParamPartition none(std::size_t n) { return {std::vector<bool>(n, false)}; }
};

// Extract the corruptible coordinates of a full-length vector.
inline Vec gather_corruptible(const Vec& full, const ParamPartition& part) {
  if (full.size() != part.mask.size())
    throw invalid_input("gather_corruptible: length mismatch");
  Vec out;
  out.reserve(part.k());
  for (std::size_t i = 0; i < full.size(); ++i)
    if (part.mask[i]) out.push_back(full[i]);
  return out;
}

// Add a corruptible-length vector into the masked coordinates of `full`.
inline void scatter_add(Vec& full, const Vec& a, const ParamPartition& part) {
  if (full.size() != part.mask.size())
    throw invalid_input("scatter_add: mask length mismatch");
  std::size_t j = 0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (part.mask[i]) {
      if (j >= a.size()) throw invalid_input("scatter_add: corruption too short");
      full[i] += a[j++];
    }
  }
  if (j != a.size()) throw invalid_input("scatter_add: corruption too long");
}

inline double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

// Derivative with respect to the pre-activation, given pre-activation z.
// ReLU subgradient at 0 is taken as 0.
inline double activation_deriv(Activation act, double z) {
  switch (act) {
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

struct ForwardResult {
  double loss = 0.0;
  Tensor outputs;  // post-activation output of the last layer, rows = examples
};

struct BackwardResult {
  Vec param_grad;   // length k_total, flatten order
  Tensor input_grad;  // dL/dx, same shape as batch inputs
};

// Dense feed-forward network over a flat 64-bit parameter vector.
// Flatten order: per layer, weights row-major (out x in) then bias.
class Model {
public:
  Model(std::vector<std::size_t> dims, Activation hidden_act, Head head)
      : head_(head) {
    if (dims.size() < 2) throw invalid_input("Model: need at least input and output dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Activation act = (l + 2 == dims.size()) ? Activation::Identity : hidden_act;
      layers_.push_back({dims[l], dims[l + 1], act});
    }
    std::size_t total = 0;
    for (const auto& L : layers_) {
      offsets_.push_back(total);
      total += L.out * L.in + L.out;
    }
    params_.assign(total, 0.0);
  }

  static Model random(std::vector<std::size_t> dims, Activation act, Head head,
                      std::uint64_t seed, double scale = 0.5) {
    Model m(std::move(dims), act, head);
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (double& p : m.params_) p = u(rng);
    return m;
  }

  const std::vector<LayerSpec>& layers() const { return layers_; }
  Head head() const { return head_; }
  std::size_t param_count() const { return params_.size(); }
  std::size_t input_dim() const { return layers_.front().in; }
  std::size_t output_dim() const { return layers_.back().out; }

  const Vec& params() const { return params_; }
  void set_params(Vec p) {
    if (p.size() != params_.size()) throw invalid_input("set_params: length mismatch");
    params_ = std::move(p);
  }

  // Flat offsets of each layer's weight block; bias follows the weights.
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + layers_[layer].out * layers_[layer].in;
  }

  // Index ranges [begin, end) of each layer's parameters, for grouping.
  std::pair<std::size_t, std::size_t> layer_range(std::size_t layer) const {
    std::size_t b = offsets_[layer];
    std::size_t e = b + layers_[layer].out * layers_[layer].in + layers_[layer].out;
    return {b, e};
  }

  ForwardResult forward(const Batch& batch) const {
    check_batch(batch);
    std::size_t m = batch.size();
    Tensor cur = batch.inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) cur = layer_forward(l, cur);
    ForwardResult res;
    res.outputs = cur;
    res.loss = head_loss(cur, batch);
    return res;
  }

  Vec backward(const Batch& batch) const { return backward_full(batch).param_grad; }

  BackwardResult backward_full(const Batch& batch) const {
    check_batch(batch);
    std::size_t m = batch.size();
    std::size_t n_layers = layers_.size();

    // Forward pass, keeping pre-activations and post-activations.
    std::vector<Tensor> pre(n_layers), post(n_layers);
    Tensor cur = batch.inputs;
    for (std::size_t l = 0; l < n_layers; ++l) {
      pre[l] = affine(l, cur);
      post[l] = pre[l];
      for (double& v : post[l].values) v = apply_activation(layers_[l].act, v);
      cur = post[l];
    }

    BackwardResult res;
    res.param_grad.assign(params_.size(), 0.0);

    // Gradient of the mean loss with respect to the last post-activation.
    Tensor delta = head_output_grad(post.back(), batch);

    for (std::size_t l = n_layers; l-- > 0;) {
      const LayerSpec& L = layers_[l];
      // Through the activation.
      for (std::size_t idx = 0; idx < delta.values.size(); ++idx)
        delta.values[idx] *= activation_deriv(L.act, pre[l].values[idx]);

      const Tensor& below = (l == 0) ? batch.inputs : post[l - 1];
      double* gw = res.param_grad.data() + weight_offset(l);
      double* gb = res.param_grad.data() + bias_offset(l);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t o = 0; o < L.out; ++o) {
          double d = delta.at(r, o);
          gb[o] += d;
          for (std::size_t i = 0; i < L.in; ++i) gw[o * L.in + i] += d * below.at(r, i);
        }
      }
      // Propagate to the layer input.
      Tensor next = Tensor::zeros({m, L.in});
      const double* w = params_.data() + weight_offset(l);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t o = 0; o < L.out; ++o) {
          double d = delta.at(r, o);
          for (std::size_t i = 0; i < L.in; ++i) next.at(r, i) += d * w[o * L.in + i];
        }
      delta = std::move(next);
    }
    res.input_grad = std::move(delta);
    return res;
  }

  // Returns a copy with the corruptible coordinates shifted by `a`.
  Model corrupted(const Vec& a, const ParamPartition& part) const {
    if (!all_finite(a)) throw invalid_input("corrupted: non-finite corruption");
    Model m = *this;
    scatter_add(m.params_, a, part);
    return m;
  }

private:
  void check_batch(const Batch& batch) const {
    if (batch.inputs.cols() != input_dim())
      throw invalid_input("batch input width does not match model input layer");
    if (batch.size() == 0) throw invalid_input("empty batch");
    if (head_ == Head::SoftmaxCrossEntropy) {
      if (batch.labels.size() != batch.size())
        throw invalid_input("batch labels/input row count mismatch");
      for (int y : batch.labels)
        if (y < 0 || static_cast<std::size_t>(y) >= output_dim())
          throw invalid_input("label out of range");
    } else {
      if (batch.targets.rows() != batch.size() || batch.targets.cols() != output_dim())
        throw invalid_input("batch targets/input row count mismatch");
    }
  }

  Tensor affine(std::size_t l, const Tensor& x) const {
    const LayerSpec& L = layers_[l];
    std::size_t m = x.rows();
    Tensor out = Tensor::zeros({m, L.out});
    const double* w = params_.data() + weight_offset(l);
    const double* b = params_.data() + bias_offset(l);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t o = 0; o < L.out; ++o) {
        double s = b[o];
        for (std::size_t i = 0; i < L.in; ++i) s += w[o * L.in + i] * x.at(r, i);
        out.at(r, o) = s;
      }
    return out;
  }

  Tensor layer_forward(std::size_t l, const Tensor& x) const {
    Tensor z = affine(l, x);
    for (double& v : z.values) v = apply_activation(layers_[l].act, v);
    return z;
  }

  double head_loss(const Tensor& out, const Batch& batch) const {
    std::size_t m = batch.size();
    double total = 0.0;
    if (head_ == Head::SoftmaxCrossEntropy) {
      for (std::size_t r = 0; r < m; ++r) {
        double mx = out.at(r, 0);
        for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out.at(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < out.cols(); ++c) z += std::exp(out.at(r, c) - mx);
        total += std::log(z) + mx - out.at(r, static_cast<std::size_t>(batch.labels[r]));
      }
    } else {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) {
          double e = out.at(r, c) - batch.targets.at(r, c);
          total += e * e;
        }
    }
    return total / static_cast<double>(m);
  }

  // d(mean loss)/d(last post-activation).
  Tensor head_output_grad(const Tensor& out, const Batch& batch) const {
    std::size_t m = batch.size();
    Tensor g = Tensor::zeros({m, out.cols()});
    double inv_m = 1.0 / static_cast<double>(m);
    if (head_ == Head::SoftmaxCrossEntropy) {
      for (std::size_t r = 0; r < m; ++r) {
        double mx = out.at(r, 0);
        for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out.at(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < out.cols(); ++c) z += std::exp(out.at(r, c) - mx);
        for (std::size_t c = 0; c < out.cols(); ++c) {
          double p = std::exp(out.at(r, c) - mx) / z;
          g.at(r, c) = (p - (static_cast<std::size_t>(batch.labels[r]) == c ? 1.0 : 0.0)) * inv_m;
        }
      }
    } else {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < out.cols(); ++c)
          g.at(r, c) = 2.0 * (out.at(r, c) - batch.targets.at(r, c)) * inv_m;
    }
    return g;
  }

  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  Head head_;
  Vec params_;
};

}  // namespace pcdef
