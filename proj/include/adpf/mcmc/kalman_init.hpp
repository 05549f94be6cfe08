#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/errors.hpp"
#include "adpf/core/weights.hpp"
#include "adpf/mcmc/priors.hpp"

namespace adpf {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;  // maximized objective
  int evaluations = 0;
};

/// Maximizes f by the Nelder-Mead simplex. -inf (or NaN) is treated as the worst value.
inline NelderMeadResult nelder_mead_max(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                        int max_evals = 2000, double tol = 1e-8) {
  const Eigen::Index n = x0.size();
  NelderMeadResult res;
  auto val = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? kNegInf : v;
  };
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  fv[0] = val(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[static_cast<std::size_t>(i + 1)][i] += step[i];
    fv[static_cast<std::size_t>(i + 1)] = val(pts[static_cast<std::size_t>(i + 1)]);
  }
  std::vector<std::size_t> ord(pts.size());
  while (res.evaluations < max_evals) {
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
    const std::size_t best = ord.front(), worst = ord.back(), second = ord[ord.size() - 2];
    if (std::isfinite(fv[best]) && std::isfinite(fv[worst]) &&
        std::abs(fv[best] - fv[worst]) <= tol * (1.0 + std::abs(fv[best])))
      break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != worst) centroid += pts[i];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
    const double fr = val(xr);
    if (fr > fv[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = val(xe);
      if (fe > fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr > fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr > fv[worst];
      const Eigen::VectorXd xc =
          outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid)) : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
      const double fc = val(xc);
      if (fc > (outside ? fr : fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          fv[i] = val(pts[i]);
        }
      }
    }
  }
  const auto it = std::max_element(fv.begin(), fv.end());
  res.x = pts[static_cast<std::size_t>(it - fv.begin())];
  res.value = *it;
  return res;
}

/// Posterior mode of a linear-Gaussian approximation: maximizes
/// kalman_loglik(theta) + log_prior(theta) by Nelder-Mead from the prior
/// mean, restarting `restarts` times from the best point. With no data the
/// prior mean is returned.
inline Eigen::VectorXd kalman_ml_init(const std::function<double(const Eigen::VectorXd&)>& kalman_loglik,
                                      const PriorSpec& prior, std::size_t T, int restarts = 5) {
  const Eigen::VectorXd mean = prior.means();
  if (T == 0) return mean;
  auto obj = [&](const Eigen::VectorXd& th) {
    const double lp = prior.log_prior(th);
    if (!(lp > kNegInf)) return kNegInf;
    double ll;
    try {
      ll = kalman_loglik(th);
    } catch (const std::exception&) {
      return kNegInf;
    }
    return std::isfinite(ll) ? ll + lp : kNegInf;
  };
  Eigen::VectorXd best = mean;
  double best_v = obj(mean);
  Eigen::VectorXd step = prior.sds();
  for (int r = 0; r < restarts; ++r) {
    const auto res = nelder_mead_max(obj, best, step);
    if (res.value > best_v || !(best_v > kNegInf)) {
      best = res.x;
      best_v = res.value;
    }
    step *= 0.5;
  }
  if (!(best_v > kNegInf)) throw OptimFailed("Kalman objective is -inf at every restart");
  return best;
}

}  // namespace adpf
