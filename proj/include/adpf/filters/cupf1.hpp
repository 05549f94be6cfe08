#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "adpf/core/gaussian.hpp"
#include "adpf/core/model.hpp"
#include "adpf/filters/likelihood.hpp"
#include "adpf/filters/unscented.hpp"

namespace adpf {

/// Unscented first- and second-stage densities for one particle.
///
/// The joint (u, y) is obtained from an unscented pass over z = (u, e) ~ N(0, I)
/// mapped to (u, mean(h(x, u)) + sd * e). g(y | x) is the y-marginal and
/// g(u | y, x) the Gaussian conditional. `fallback` is set when either
/// covariance is not positive definite; then u ~ p(u) and the model's
/// moment-matched g(y | x) are used instead.
template <GaussianObservationModel M>
struct UnscentedParticleProposal {
  using Dist = typename M::Disturbance;
  static constexpr int du = M::disturbance_dim;
  static constexpr int dy = M::obs_dim;

  double log_g = 0.0;
  Dist cond_mean;
  Eigen::Matrix<double, du, du> cond_chol;
  bool fallback = false;

  void build(const typename M::State& x, const typename M::Observation& y, CountedTransition<M>& h,
             const UnscentedConfig& cfg) {
    const M& model = h.model();
    const auto sd = model.observation_sd();
    auto map = [&](const Eigen::VectorXd& z) {
      Dist u = z.head<du>();
      Eigen::VectorXd out(du + dy);
      out.head<du>() = u;
      out.tail<dy>() = model.observation_mean(h(x, u)).array() + sd.array() * z.tail<dy>().array();
      return out;
    };
    fallback = false;
    UnscentedMoments mom;
    try {
      mom = unscented_moments(Eigen::VectorXd::Zero(du + dy), Eigen::MatrixXd::Identity(du + dy, du + dy),
                              map, cfg);
    } catch (const CovarianceNotPD&) {
      use_fallback(x, y, model);
      return;
    }
    const Eigen::Matrix<double, dy, 1> ybar = mom.mean.tail<dy>();
    const Eigen::Matrix<double, dy, dy> pyy = mom.cov.bottomRightCorner<dy, dy>();
    const Eigen::Matrix<double, du, dy> puy = mom.cov.topRightCorner<du, dy>();
    const Eigen::Matrix<double, du, du> puu = mom.cov.topLeftCorner<du, du>();
    Eigen::Matrix<double, dy, dy> lyy;
    if (!cholesky_lower(pyy, lyy)) {
      use_fallback(x, y, model);
      return;
    }
    Eigen::Matrix<double, dy, 1> yy = y;
    log_g = mvn_logpdf_chol(yy, ybar, lyy);
    Eigen::Matrix<double, du, dy> gain =
        lyy.transpose().template triangularView<Eigen::Upper>().solve(
            lyy.template triangularView<Eigen::Lower>().solve(puy.transpose())).transpose();
    cond_mean = mom.mean.head<du>() + gain * (yy - ybar);
    Eigen::Matrix<double, du, du> pc = puu - gain * puy.transpose();
    pc = 0.5 * (pc + pc.transpose());
    if (!cholesky_lower(pc, cond_chol) || !std::isfinite(log_g)) use_fallback(x, y, model);
  }

  ProposalDraw<Dist> sample(RandomStream& rng) const {
    Dist z;
    fill_standard_normal(z, rng);
    if (fallback) return {z, log_disturbance_density(z)};
    Dist u = cond_mean + cond_chol * z;
    return {u, mvn_logpdf_chol(u, cond_mean, cond_chol)};
  }

 private:
  void use_fallback(const typename M::State& x, const typename M::Observation& y, const M& model) {
    fallback = true;
    log_g = model.first_stage_log_density(y, x);
  }
};

/// Per-particle unscented auxiliary filter (CUPF1 comparator): the Algorithm 1
/// weighting skeleton with both g densities taken from an unscented pass.
template <GaussianObservationModel M>
FilterResult<typename M::State> cupf1_filter(const M& model,
                                             std::span<const typename M::Observation> ys,
                                             std::size_t n, RandomStream& rng,
                                             const UnscentedConfig& cfg = {},
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
  std::vector<UnscentedParticleProposal<M>> prop(n);
  std::vector<double> log_pi(n, -std::log(static_cast<double>(n)));
  std::vector<double> first(n), v(n), logw(n), w(n);
  std::vector<std::size_t> idx(n);
  AliasTable table;
  const double log_n = std::log(static_cast<double>(n));

  for (std::size_t t = 0; t < ys.size(); ++t) {
    const auto& y = ys[t];
    for (std::size_t k = 0; k < n; ++k) {
      prop[k].build(x[k], y, h, cfg);
      const double g = prop[k].log_g;
      first[k] = (std::isnan(g) ? kNegInf : g) + log_pi[k];
    }
    const double inc1 = log_sum_exp(first);
    if (!(inc1 > kNegInf)) {
      detail::push_increment(est, kNegInf, FilterStatus::all_weights_zero);
      break;
    }
    normalize_log_weights_into(first, v);
    resample_into(opt.resampling, v, idx, rng, table);
    for (std::size_t k = 0; k < n; ++k) anc[k] = x[idx[k]];
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = prop[idx[k]];
      const auto d = p.sample(rng);
      x[k] = h(anc[k], d.u);
      const double lw = model.log_measurement_density(y, x[k]) + log_disturbance_density(d.u) -
                        p.log_g - d.log_density;
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

template <GaussianObservationModel M>
FilterResult<typename M::State> cupf1_filter(const M& model,
                                             const std::vector<typename M::Observation>& ys,
                                             std::size_t n, RandomStream& rng,
                                             const UnscentedConfig& cfg = {},
                                             const FilterOptions& opt = {}) {
  return cupf1_filter(model, std::span<const typename M::Observation>(ys), n, rng, cfg, opt);
}

}  // namespace adpf
