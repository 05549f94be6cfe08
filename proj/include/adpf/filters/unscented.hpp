#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "adpf/core/errors.hpp"

namespace adpf {

struct UnscentedConfig {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
};

struct UnscentedWeights {
  double lambda;
  double wm0, wc0, wi;
};

inline UnscentedWeights unscented_weights(int n, const UnscentedConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("unscented alpha must be positive");
  const double lambda = cfg.alpha * cfg.alpha * (n + cfg.kappa) - n;
  if (!(n + lambda > 0.0)) throw std::invalid_argument("unscented n + lambda must be positive");
  const double wm0 = lambda / (n + lambda);
  return {lambda, wm0, wm0 + 1.0 - cfg.alpha * cfg.alpha + cfg.beta, 0.5 / (n + lambda)};
}

struct UnscentedMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd cross;  // Cov(input, output)
};

/// Propagates N(mean, cov) through `map` with 2n+1 sigma points
/// mean, mean +- columns of sqrt((n + lambda) cov).
template <class F>
UnscentedMoments unscented_moments(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, F&& map,
                                   const UnscentedConfig& cfg = {}) {
  const int n = static_cast<int>(mean.size());
  const auto w = unscented_weights(n, cfg);

  // symmetric square root; tolerates exact zeros on the diagonal
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (cov + cov.transpose()));
  if (es.info() != Eigen::Success) throw CovarianceNotPD("eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-12 * scale || !std::isfinite(ev[i])) throw CovarianceNotPD("covariance is indefinite");
    ev[i] = std::max(ev[i], 0.0);
  }
  const Eigen::MatrixXd root =
      es.eigenvectors() * (ev * (n + w.lambda)).cwiseSqrt().asDiagonal();

  Eigen::VectorXd y0 = map(Eigen::VectorXd(mean));
  const Eigen::Index m = y0.size();
  Eigen::MatrixXd ys(m, 2 * n);
  for (int i = 0; i < n; ++i) {
    ys.col(i) = map(Eigen::VectorXd(mean + root.col(i)));
    ys.col(n + i) = map(Eigen::VectorXd(mean - root.col(i)));
  }

  UnscentedMoments out;
  // weights sum to one; centring on y0 avoids cancelling the large negative wm0
  out.mean = y0 + w.wi * (ys.colwise() - y0).rowwise().sum();
  const Eigen::VectorXd d0 = y0 - out.mean;
  out.cov = w.wc0 * d0 * d0.transpose();
  out.cross = Eigen::MatrixXd::Zero(n, m);  // the centre point has zero input deviation
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd dp = ys.col(i) - out.mean;
    const Eigen::VectorXd dm = ys.col(n + i) - out.mean;
    out.cov += w.wi * (dp * dp.transpose() + dm * dm.transpose());
    out.cross += w.wi * (root.col(i) * (dp - dm).transpose());
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

}  // namespace adpf
