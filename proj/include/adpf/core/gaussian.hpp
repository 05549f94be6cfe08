#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "adpf/core/model.hpp"

namespace adpf {

/// log N(x; mean, L L^T) given the lower Cholesky factor L.
template <class V, class Mat>
double mvn_logpdf_chol(const V& x, const V& mean, const Mat& chol_lower) {
  const auto n = x.size();
  Eigen::VectorXd z = (x - mean).template cast<double>();
  chol_lower.template triangularView<Eigen::Lower>().solveInPlace(z);
  double log_det_half = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det_half += std::log(chol_lower(i, i));
  return -0.5 * z.squaredNorm() - log_det_half - kLogSqrt2Pi * static_cast<double>(n);
}

/// Lower Cholesky factor; false when `cov` is not numerically positive definite.
template <class Mat>
bool cholesky_lower(const Mat& cov, Mat& out) {
  if (!cov.allFinite()) return false;
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() != Eigen::Success) return false;
  out = llt.matrixL();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (!(out(i, i) > 0.0)) return false;
  }
  return true;
}

}  // namespace adpf
