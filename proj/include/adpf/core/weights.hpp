#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "adpf/core/errors.hpp"

namespace adpf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(v))) with max subtraction. Returns -inf when every entry is -inf
/// (NaN entries count as -inf).
inline double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) {
    if (x > m) m = x;
  }
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : v) {
    if (x > kNegInf) s += std::exp(x - m);
  }
  return m + std::log(s);
}

struct NormalizedWeights {
  std::vector<double> weights;
  double log_sum;
};

/// Writes exp(logw - logsumexp(logw)) into `out` and returns the log sum.
/// The largest term is exp(0) = 1 exactly. Throws AllWeightsZero when every
/// entry is -inf or NaN.
inline double normalize_log_weights_into(std::span<const double> logw, std::span<double> out) {
  assert(!logw.empty() && out.size() == logw.size());
  double m = kNegInf;
  for (double x : logw) {
    if (x > m) m = x;
  }
  if (!(m > kNegInf)) throw AllWeightsZero();
  double s = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    const double e = logw[i] > kNegInf ? std::exp(logw[i] - m) : 0.0;
    out[i] = e;
    s += e;
  }
  const double inv = 1.0 / s;
  for (double& w : out) w *= inv;
  return m + std::log(s);
}

inline NormalizedWeights normalize_log_weights(std::span<const double> logw) {
  NormalizedWeights r{std::vector<double>(logw.size()), 0.0};
  r.log_sum = normalize_log_weights_into(logw, r.weights);
  return r;
}

/// 1 / sum(w^2) for normalized weights.
inline double effective_sample_size(std::span<const double> w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return 1.0 / s;
}

/// Shannon entropy of normalized weights, in nats.
inline double weight_entropy(std::span<const double> w) {
  double h = 0.0;
  for (double x : w) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace adpf
