#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "adpf/core/errors.hpp"

namespace adpf {

/// Sample autocorrelations rho_1 .. rho_max_lag (biased estimator, divisor K).
inline std::vector<double> autocorrelations(std::span<const double> x, std::size_t max_lag) {
  const std::size_t k = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(k);
  std::vector<double> c(k);
  double c0 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = x[i] - mean;
    c0 += c[i] * c[i];
  }
  if (!(c0 > 0.0)) throw ZeroVariance();
  std::vector<double> rho;
  max_lag = std::min(max_lag, k - 1);
  rho.reserve(max_lag);
  for (std::size_t j = 1; j <= max_lag; ++j) {
    double s = 0.0;
    for (std::size_t i = j; i < k; ++i) s += c[i] * c[i - j];
    rho.push_back(s / c0);
  }
  return rho;
}

/// IF = 1 + 2 sum_{j=1}^{L*} rho_j with L the first lag where |rho_j| < 2/sqrt(K)
/// and L* = min(max_lag, L). `rho[0]` is the lag-1 autocorrelation.
inline double inefficiency_from_autocorrelations(std::span<const double> rho, std::size_t K,
                                                 std::size_t max_lag = 1000) {
  const double thresh = 2.0 / std::sqrt(static_cast<double>(K));
  double s = 0.0;
  for (std::size_t j = 1; j <= std::min(max_lag, rho.size()); ++j) {
    s += rho[j - 1];
    if (std::abs(rho[j - 1]) < thresh) break;
  }
  return 1.0 + 2.0 * s;
}

/// Inefficiency factor of one chain component.
inline double inefficiency(std::span<const double> chain, std::size_t max_lag = 1000) {
  if (chain.size() < 10) throw std::invalid_argument("inefficiency needs at least 10 draws");
  const std::size_t K = chain.size();
  // lags are computed in blocks so short-memory chains stay cheap
  const double thresh = 2.0 / std::sqrt(static_cast<double>(K));
  std::size_t lag = std::min<std::size_t>(64, max_lag);
  for (;;) {
    const auto rho = autocorrelations(chain, lag);
    bool hit = false;
    for (double r : rho) hit = hit || std::abs(r) < thresh;
    if (hit || lag >= max_lag || lag >= K - 1) return inefficiency_from_autocorrelations(rho, K, max_lag);
    lag = std::min(lag * 4, max_lag);
  }
}

inline double computing_time(double k, double n, double inefficiency_factor) { return k * n * inefficiency_factor; }

/// Transition calls per particle per observation per filter run.
inline double evaluations_per_particle(double tally, double n, double T, double runs) {
  return tally / (n * T * runs);
}

}  // namespace adpf
