#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "adpf/core/model.hpp"
#include "adpf/filters/likelihood.hpp"

namespace adpf {

/// Bootstrap filter: propagate through the transition with u ~ p(u), weight by
/// p(y | x), resample every step. The per-step increment is the log of the mean
/// unnormalized weight.
template <StateSpaceModel M>
FilterResult<typename M::State> sir_filter(const M& model,
                                           std::span<const typename M::Observation> ys,
                                           std::size_t n, RandomStream& rng,
                                           const FilterOptions& opt = {}) {
  using State = typename M::State;
  using Dist = typename M::Disturbance;
  if (n == 0) throw std::invalid_argument("particle count must be positive");

  FilterResult<State> res;
  auto& est = res.estimate;
  est.particle_count = n;
  res.trace.enabled = opt.trace;

  CountedTransition<M> h(model);
  std::vector<State> x(n), next(n);
  for (auto& xi : x) xi = model.sample_initial(rng);
  std::vector<double> logw(n), w(n);
  std::vector<std::size_t> idx(n);
  AliasTable table;
  const double log_n = std::log(static_cast<double>(n));

  for (std::size_t t = 0; t < ys.size(); ++t) {
    Dist u;
    for (std::size_t k = 0; k < n; ++k) {
      fill_standard_normal(u, rng);
      next[k] = h(x[k], u);
      const double lw = model.log_measurement_density(ys[t], next[k]);
      logw[k] = std::isnan(lw) ? kNegInf : lw;
    }
    std::swap(x, next);
    if (!detail::push_increment(est, log_sum_exp(logw) - log_n, FilterStatus::all_weights_zero))
      break;
    normalize_log_weights_into(logw, w);
    if (opt.trace) {
      res.trace.snapshots.emplace_back(x, logw, t + 1);
      res.trace.ess.push_back(effective_sample_size(w));
    }
    if (t + 1 < ys.size()) {
      resample_into(opt.resampling, w, idx, rng, table);
      for (std::size_t k = 0; k < n; ++k) next[k] = x[idx[k]];
      std::swap(x, next);
    }
  }
  est.eval_tally = h.count();
  return res;
}

template <StateSpaceModel M>
FilterResult<typename M::State> sir_filter(const M& model,
                                           const std::vector<typename M::Observation>& ys,
                                           std::size_t n, RandomStream& rng,
                                           const FilterOptions& opt = {}) {
  return sir_filter(model, std::span<const typename M::Observation>(ys), n, rng, opt);
}

}  // namespace adpf
