#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adpf/core/errors.hpp"
#include "adpf/core/random.hpp"

namespace adpf {

enum class ResamplingScheme { multinomial, stratified };

/// Throws InvalidWeights if any weight is negative or non-finite, or the sum
/// differs from one by more than `tol`.
inline void validate_weights(std::span<const double> w, double tol = 1e-9) {
  if (w.empty()) throw InvalidWeights("empty weight vector");
  double s = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidWeights("negative or non-finite weight");
    s += x;
  }
  if (std::abs(s - 1.0) > tol) throw InvalidWeights("weights sum to " + std::to_string(s));
}

/// Walker/Vose alias table: O(N) build, O(1) per i.i.d. draw.
class AliasTable {
 public:
  void build(std::span<const double> w) {
    const std::size_t n = w.size();
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    small_.clear();
    large_.clear();
    scaled_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      scaled_[i] = w[i] * static_cast<double>(n);
      (scaled_[i] < 1.0 ? small_ : large_).push_back(i);
    }
    while (!small_.empty() && !large_.empty()) {
      const std::size_t s = small_.back();
      small_.pop_back();
      const std::size_t l = large_.back();
      prob_[s] = scaled_[s];
      alias_[s] = l;
      scaled_[l] = (scaled_[l] + scaled_[s]) - 1.0;
      if (scaled_[l] < 1.0) {
        large_.pop_back();
        small_.push_back(l);
      }
    }
    // leftovers are 1 up to rounding
    for (std::size_t i : large_) prob_[i] = 1.0;
    for (std::size_t i : small_) prob_[i] = scaled_[i] > 0.0 ? 1.0 : 0.0;
  }

  std::size_t sample(RandomStream& rng) const {
    const std::size_t n = prob_.size();
    const double v = rng.uniform() * static_cast<double>(n);
    std::size_t i = static_cast<std::size_t>(v);
    if (i >= n) i = n - 1;
    return (v - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
  std::vector<std::size_t> small_, large_;
  std::vector<double> scaled_;
};

/// `out.size()` i.i.d. draws with P(index = i) = w[i]. `table` is scratch space.
inline void multinomial_resample_into(std::span<const double> w, std::span<std::size_t> out,
                                      RandomStream& rng, AliasTable& table) {
  validate_weights(w);
  table.build(w);
  for (auto& idx : out) idx = table.sample(rng);
}

inline std::vector<std::size_t> multinomial_resample(std::span<const double> w, std::size_t count,
                                                     RandomStream& rng) {
  if (count == 0) throw std::invalid_argument("resample count must be positive");
  std::vector<std::size_t> out(count);
  AliasTable table;
  multinomial_resample_into(w, out, rng, table);
  return out;
}

/// One uniform per stratum [k/n, (k+1)/n). Output is sorted.
inline void stratified_resample_into(std::span<const double> w, std::span<std::size_t> out,
                                     RandomStream& rng) {
  validate_weights(w);
  const std::size_t n = out.size();
  std::size_t i = 0;
  double cum = w[0];
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (static_cast<double>(k) + rng.uniform()) / static_cast<double>(n);
    while (u >= cum && i + 1 < w.size()) cum += w[++i];
    out[k] = i;
  }
}

inline void resample_into(ResamplingScheme scheme, std::span<const double> w,
                          std::span<std::size_t> out, RandomStream& rng, AliasTable& table) {
  if (scheme == ResamplingScheme::stratified) {
    stratified_resample_into(w, out, rng);
  } else {
    multinomial_resample_into(w, out, rng, table);
  }
}

}  // namespace adpf
