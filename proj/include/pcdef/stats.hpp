#pragma once

#include "pcdef/common.hpp"

namespace pcdef {

struct TTestResult {
  double t = 0.0;
  unsigned df = 0;
  bool significant = false;  // only meaningful at df = 4 (threshold 2.132)
};

// Pooled two-sample t statistic for equal sample sizes:
// t = (m1 - m2) / sqrt((s1^2 + s2^2) / n), df = 2(n - 1). The significance
// flag applies the df = 4 threshold t > 2.132 (p = 0.05, one-sided).
inline TTestResult two_sample_t(double mean1, double std1, double mean2, double std2,
                                std::size_t n) {
  if (n < 2) throw invalid_input("two_sample_t: n must be >= 2");
  if (std1 < 0.0 || std2 < 0.0) throw invalid_input("two_sample_t: negative std");
  if (std1 == 0.0 && std2 == 0.0)
    throw invalid_input("two_sample_t: both stds zero (degenerate)");
  TTestResult r;
  r.t = (mean1 - mean2) /
        std::sqrt((std1 * std1 + std2 * std2) / static_cast<double>(n));
  r.df = static_cast<unsigned>(2 * (n - 1));
  r.significant = (r.df == 4) && r.t > 2.132;
  return r;
}

}  // namespace pcdef
