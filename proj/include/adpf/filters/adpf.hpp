#pragma once

#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "adpf/core/model.hpp"
#include "adpf/filters/likelihood.hpp"

namespace adpf {

// Second-stage proposal g(u | y, x~). prepare() sees the resampled ancestors
// once per step; sample() then draws for ancestor k.
template <class A, class M>
concept DisturbanceAdapter = StateSpaceModel<M> &&
    requires(A& a, std::span<const typename M::State> xs, const typename M::Observation& y,
             CountedTransition<M>& h, RandomStream& rng, std::size_t k) {
  a.prepare(xs, y, h, rng);
  { a.sample(k, rng) } -> std::convertible_to<ProposalDraw<typename M::Disturbance>>;
};

/// Auxiliary disturbance particle filter.
///
/// Per step: first-stage weights g(y|x) pi, multinomial resample, draw u from
/// the adapter, move x' = h(x~, u) and reweight by
/// p(y|x') phi(u) / (g(y|x~) g(u|y,x~)). The step's log increment is
/// log(sum_k g(y|x^k) pi^k) + log(mean_k w^k).
template <FirstStageModel M, class Adapter>
  requires DisturbanceAdapter<Adapter, M>
FilterResult<typename M::State> adpf_filter(const M& model, Adapter& adapter,
                                            std::span<const typename M::Observation> ys,
                                            std::size_t n, RandomStream& rng,
                                            const FilterOptions& opt = {}) {
  using State = typename M::State;
  if (n == 0) throw std::invalid_argument("particle count must be positive");

  FilterResult<State> res;
  auto& est = res.estimate;
  est.particle_count = n;
  res.trace.enabled = opt.trace;

  CountedTransition<M> h(model);
  std::vector<State> x(n), anc(n);
  for (auto& xi : x) xi = model.sample_initial(rng);
  std::vector<double> log_pi(n, -std::log(static_cast<double>(n)));
  std::vector<double> log_g(n), first(n), v(n), logw(n), w(n);
  std::vector<std::size_t> idx(n);
  AliasTable table;
  const double log_n = std::log(static_cast<double>(n));

  for (std::size_t t = 0; t < ys.size(); ++t) {
    const auto& y = ys[t];
    for (std::size_t k = 0; k < n; ++k) {
      const double g = model.first_stage_log_density(y, x[k]);
      log_g[k] = std::isnan(g) ? kNegInf : g;
      first[k] = log_g[k] + log_pi[k];
    }
    const double inc1 = log_sum_exp(first);
    if (!(inc1 > kNegInf)) {
      detail::push_increment(est, kNegInf, FilterStatus::all_weights_zero);
      break;
    }
    normalize_log_weights_into(first, v);
    resample_into(opt.resampling, v, idx, rng, table);
    for (std::size_t k = 0; k < n; ++k) anc[k] = x[idx[k]];

    try {
      adapter.prepare(std::span<const State>(anc), y, h, rng);
    } catch (const ProposalUnsupported&) {
      detail::push_increment(est, kNegInf, FilterStatus::proposal_unsupported);
      break;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto d = adapter.sample(k, rng);
      x[k] = h(anc[k], d.u);
      const double lw = model.log_measurement_density(y, x[k]) + log_disturbance_density(d.u) -
                        log_g[idx[k]] - d.log_density;
      logw[k] = std::isnan(lw) ? kNegInf : lw;
    }
    const double inc2 = log_sum_exp(logw) - log_n;
    if (!detail::push_increment(est, inc1 + inc2, FilterStatus::all_weights_zero)) break;
    const double lse = normalize_log_weights_into(logw, w);
    for (std::size_t k = 0; k < n; ++k) log_pi[k] = logw[k] - lse;
    if (opt.trace) {
      res.trace.snapshots.emplace_back(x, logw, t + 1);
      res.trace.ess.push_back(effective_sample_size(w));
      res.trace.first_stage_entropy.push_back(weight_entropy(v));
    }
  }
  est.eval_tally = h.count();
  return res;
}

template <FirstStageModel M, class Adapter>
  requires DisturbanceAdapter<Adapter, M>
FilterResult<typename M::State> adpf_filter(const M& model, Adapter& adapter,
                                            const std::vector<typename M::Observation>& ys,
                                            std::size_t n, RandomStream& rng,
                                            const FilterOptions& opt = {}) {
  return adpf_filter(model, adapter, std::span<const typename M::Observation>(ys), n, rng, opt);
}

}  // namespace adpf
