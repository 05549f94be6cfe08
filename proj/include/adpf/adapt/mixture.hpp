#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adpf/adapt/laplace.hpp"
#include "adpf/core/gaussian.hpp"
#include "adpf/core/model.hpp"

namespace adpf {

template <int Du>
struct MixtureComponent {
  Eigen::Matrix<double, Du, 1> mean;
  Eigen::Matrix<double, Du, Du> cov;
  Eigen::Matrix<double, Du, Du> chol;  // lower
  double log_normalizer;               // -log det(chol) - (Du/2) log(2 pi)

  double logpdf(const Eigen::Matrix<double, Du, 1>& u) const {
    Eigen::Matrix<double, Du, 1> z = u - mean;
    chol.template triangularView<Eigen::Lower>().solveInPlace(z);
    return -0.5 * z.squaredNorm() + log_normalizer;
  }
};

template <int Du>
MixtureComponent<Du> make_component(const Eigen::Matrix<double, Du, 1>& mean,
                                    const Eigen::Matrix<double, Du, Du>& cov) {
  MixtureComponent<Du> c{mean, cov, {}, 0.0};
  if (!cholesky_lower(cov, c.chol)) throw CovarianceNotPD("mixture component covariance");
  c.log_normalizer = -kLogSqrt2Pi * Du;
  for (int i = 0; i < Du; ++i) c.log_normalizer -= std::log(c.chol(i, i));
  return c;
}

/// Equally weighted Gaussian components with a per-target admitted subset
/// (stored compressed: target j owns admitted[offsets[j] .. offsets[j+1])).
template <int Du>
struct MixtureProposal {
  using U = Eigen::Matrix<double, Du, 1>;

  std::vector<MixtureComponent<Du>> components;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> admitted;

  std::size_t targets() const { return offsets.size() - 1; }
  std::span<const std::size_t> admitted_for(std::size_t j) const {
    return {admitted.data() + offsets[j], offsets[j + 1] - offsets[j]};
  }

  double logpdf(std::size_t j, const U& u) const {
    const auto adm = admitted_for(j);
    double m = kNegInf, acc = 0.0;
    // streaming logsumexp
    for (std::size_t i : adm) {
      const double l = components[i].logpdf(u);
      if (l <= m) {
        acc += std::exp(l - m);
      } else {
        acc = (m == kNegInf ? 0.0 : acc * std::exp(m - l)) + 1.0;
        m = l;
      }
    }
    if (m == kNegInf) return kNegInf;
    return m + std::log(acc) - std::log(static_cast<double>(adm.size()));
  }

  /// Uniform admitted component, then its Gaussian. The density returned is
  /// the full mixture density at the draw.
  ProposalDraw<U> sample(std::size_t j, RandomStream& rng) const {
    const auto adm = admitted_for(j);
    const auto& c = components[adm[adm.size() == 1 ? 0 : rng.below(adm.size())]];
    U z;
    fill_standard_normal(z, rng);
    const U u = c.mean + c.chol * z;
    return {u, logpdf(j, u)};
  }
};

/// Admission residual of mode u for a target: the largest standardized
/// deviation max_c |(y - mean(h(x_prev, u)))_c / sd_c|. Not tallied.
template <GaussianObservationModel M>
double admission_residual(const typename M::Disturbance& u, const typename M::State& x_prev,
                          const typename M::Observation& y, const M& model) {
  const typename M::Observation r =
      (y - model.observation_mean(model.transition(x_prev, u))).cwiseQuotient(model.observation_sd());
  const double v = r.cwiseAbs().maxCoeff();
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

/// One component per mode; target j admits component i when mode i, pushed
/// through target j's previous state, lands within `window` measurement
/// standard deviations of y. A target with nothing admitted keeps the single
/// component of smallest residual (lowest index on ties).
template <GaussianObservationModel M>
MixtureProposal<M::disturbance_dim> build_mixture(
    std::span<const ModeEstimate<M::disturbance_dim, M::obs_dim>> modes,
    std::span<const typename M::State> targets, const typename M::Observation& y, const M& model,
    double window = 3.0) {
  constexpr int du = M::disturbance_dim;
  if (modes.empty()) throw std::invalid_argument("mixture needs at least one mode");
  MixtureProposal<du> mix;
  mix.components.reserve(modes.size());
  for (const auto& m : modes) mix.components.push_back(make_component<du>(m.u_mode, m.curvature));

  // resampled targets repeat; evaluate each distinct state once
  std::vector<std::size_t> order(targets.size());
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto& xa = targets[a];
    const auto& xb = targets[b];
    for (Eigen::Index i = 0; i < xa.size(); ++i) {
      if (xa[i] != xb[i]) return xa[i] < xb[i];
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), less);
  std::vector<std::size_t> group(targets.size());
  std::vector<std::vector<std::size_t>> lists;
  std::vector<double> resid(modes.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    const std::size_t j = order[p];
    if (p > 0 && !less(order[p - 1], j)) {
      group[j] = group[order[p - 1]];
      continue;
    }
    std::vector<std::size_t> adm;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      resid[i] = admission_residual(modes[i].u_mode, targets[j], y, model);
      if (resid[i] <= window) adm.push_back(i);
    }
    if (adm.empty()) adm.push_back(static_cast<std::size_t>(
        std::min_element(resid.begin(), resid.end()) - resid.begin()));
    group[j] = lists.size();
    lists.push_back(std::move(adm));
  }
  mix.offsets.reserve(targets.size() + 1);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto& adm = lists[group[j]];
    mix.admitted.insert(mix.admitted.end(), adm.begin(), adm.end());
    mix.offsets.push_back(mix.admitted.size());
  }
  return mix;
}

}  // namespace adpf
