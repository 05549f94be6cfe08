#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "adpf/bench/registry.hpp"
#include "adpf/mcmc/rwmh.hpp"

namespace adpf {

struct BimodalGrid {
  std::vector<double> u, x, ell;
};

/// x(u) = h(0, u) and l(u) = log p(y | h(0, u)) + log phi(u) for the quadratic
/// AR(1) at delta = 0.5, sigma_u = 1, sigma_eps = 0.2, y = 0.5.
inline BimodalGrid bimodal_grid(double u_min = -5.0, double u_max = 3.0, double step = 1e-3,
                                double sigma_eps = 0.2) {
  const Qar1Model model(Qar1Params{0.6, 1.0, sigma_eps, 0.5});
  const Qar1Model::State x0(0.0);
  const Qar1Model::Observation y(0.5);
  BimodalGrid g;
  const auto n = static_cast<std::size_t>(std::llround((u_max - u_min) / step));
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = u_min + static_cast<double>(i) * step;
    const Qar1Model::Disturbance ud(u);
    g.u.push_back(u);
    g.x.push_back(model.transition(x0, ud)[0]);
    g.ell.push_back(objective_log_density(ud, x0, y, model));
  }
  return g;
}

/// Interior strict local maxima of a sampled curve.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] > v[i - 1] && v[i] > v[i + 1]) out.push_back(i);
  return out;
}

struct ScatterPoint {
  double beta_bar, phi;
};

/// Random draws (without replacement when the chain is long enough) mapped to
/// (beta_bar, phi). Parameters missing from the chain take habit defaults.
inline std::vector<ScatterPoint> chain_scatter(const ChainRecord& chain, std::size_t count, RandomStream& rng,
                                               std::size_t burn_in = 0) {
  std::vector<std::size_t> idx;
  for (std::size_t i = burn_in; i < chain.size(); ++i) idx.push_back(i);
  if (idx.empty()) return {};
  std::vector<std::size_t> pick;
  if (idx.size() >= count) {
    std::shuffle(idx.begin(), idx.end(), rng);
    pick.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(pick.begin(), pick.end());
  } else {
    for (std::size_t i = 0; i < count; ++i) pick.push_back(idx[rng.below(idx.size())]);
  }
  std::vector<ScatterPoint> out;
  for (std::size_t i : pick) {
    ParameterVector pv;
    for (std::size_t j = 0; j < chain.names.size(); ++j)
      pv.add(chain.names[j], chain.draws[i][static_cast<Eigen::Index>(j)]);
    const HabitParams hp = HabitParams::from(pv);
    double b;
    try {
      b = rf_to_beta(hp);
    } catch (const BetaOutOfRange&) {
      b = std::nan("");
    }
    out.push_back({b, hp.phi});
  }
  return out;
}

}  // namespace adpf
