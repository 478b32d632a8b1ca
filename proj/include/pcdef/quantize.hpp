#pragma once

#include "pcdef/model.hpp"

namespace pcdef {

// Half-away-from-zero rounding; the quantizer's rounding mode is fixed and
// test-locked.
inline double round_half_away(double x) {
  return x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5);
}

// Group-wise uniform signed quantization: scale w0 = max|W| / (2^(n-1) - 1),
// W_fixed = round(W / w0) * w0. All-zero groups are returned unchanged.
inline Vec quantize_group(const Vec& w, unsigned bits) {
  if (bits < 2) throw invalid_input("quantize_group: bits must be >= 2");
  if (w.empty()) throw invalid_input("quantize_group: empty group");
  double mx = 0.0;
  for (double x : w) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return w;
  double levels = std::pow(2.0, static_cast<double>(bits - 1)) - 1.0;
  double w0 = mx / levels;
  Vec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    // w * levels / mx instead of w / w0 keeps exact ties (such as 3.5 in the
    // 4-bit reference group) on the half-away side; snapping the top level to
    // +/- max|W| makes requantization a bit-exact no-op.
    double m = round_half_away(std::abs(w[i]) * levels / mx);
    if (m == 0.0) out[i] = 0.0;  // avoid a signed zero that would flip on requantization
    else out[i] = m >= levels ? sgn(w[i]) * mx : sgn(w[i]) * m * w0;
  }
  return out;
}

inline double quantize_scale(const Vec& w, unsigned bits) {
  double mx = 0.0;
  for (double x : w) mx = std::max(mx, std::abs(x));
  double levels = std::pow(2.0, static_cast<double>(bits - 1)) - 1.0;
  return mx / levels;
}

// Quantize each weight matrix and bias vector as its own group. Coordinates
// frozen by the partition are left untouched.
inline Model quantize_model(const Model& model, unsigned bits,
                            const ParamPartition* part = nullptr) {
  Vec params = model.params();
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const LayerSpec& L = model.layers()[l];
    std::size_t wb = model.weight_offset(l), bb = model.bias_offset(l);
    auto quantize_span = [&](std::size_t begin, std::size_t len) {
      Vec group(params.begin() + begin, params.begin() + begin + len);
      Vec q = quantize_group(group, bits);
      for (std::size_t i = 0; i < len; ++i) {
        if (part && !part->mask[begin + i]) continue;
        params[begin + i] = q[i];
      }
    };
    quantize_span(wb, L.out * L.in);
    quantize_span(bb, L.out);
  }
  Model out = model;
  out.set_params(std::move(params));
  return out;
}

}  // namespace pcdef
