#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/errors.hpp"
#include "adpf/core/model.hpp"

namespace adpf {

/// x_t = b + A x_{t-1} + w,  w ~ N(0, Q)
/// y_t = c + C x_t + v,      v ~ N(0, R)
/// x_0 ~ N(m0, P0); the first observation is y_1.
struct LinearGaussianModel {
  Eigen::MatrixXd A, Q, C, R;
  Eigen::VectorXd b, c, m0;
  Eigen::MatrixXd P0;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index obs_dim() const { return C.rows(); }
};

/// Solves P = A P A^T + Q by doubling. Requires spectral radius of A below 1.
inline Eigen::MatrixXd stationary_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd p = Q, a = A;
  for (int i = 0; i < 100; ++i) {
    const Eigen::MatrixXd next = p + a * p * a.transpose();
    a = a * a;
    const double diff = (next - p).cwiseAbs().maxCoeff();
    p = next;
    if (diff <= 1e-15 * std::max(1.0, p.cwiseAbs().maxCoeff())) break;
  }
  return 0.5 * (p + p.transpose());
}

/// Sets m0, P0 to the stationary distribution of the state equation.
inline void set_stationary_prior(LinearGaussianModel& m) {
  const Eigen::Index n = m.state_dim();
  m.m0 = (Eigen::MatrixXd::Identity(n, n) - m.A).fullPivLu().solve(m.b);
  m.P0 = stationary_covariance(m.A, m.Q);
}

struct KalmanResult {
  double log_likelihood = 0.0;
  std::vector<double> increments;
  std::vector<Eigen::VectorXd> filtered_means;
  std::vector<Eigen::MatrixXd> filtered_covs;
  std::vector<Eigen::VectorXd> predicted_obs_means;
  std::vector<Eigen::MatrixXd> predicted_obs_covs;
};

/// Exact log-likelihood by the prediction-error decomposition.
inline KalmanResult kalman_filter(const LinearGaussianModel& m, const std::vector<Eigen::VectorXd>& ys) {
  KalmanResult r;
  Eigen::VectorXd x = m.m0;
  Eigen::MatrixXd p = m.P0;
  const Eigen::Index ny = m.obs_dim();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m.state_dim(), m.state_dim());
  for (const auto& y : ys) {
    x = m.b + m.A * x;
    p = m.A * p * m.A.transpose() + m.Q;
    const Eigen::VectorXd yhat = m.c + m.C * x;
    Eigen::MatrixXd s = m.C * p * m.C.transpose() + m.R;
    s = 0.5 * (s + s.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw CovarianceNotPD("innovation covariance is not positive definite");
    const Eigen::VectorXd e = y - yhat;
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(e);
    double half_logdet = 0.0;
    for (Eigen::Index i = 0; i < ny; ++i) half_logdet += std::log(L(i, i));
    const double inc = -0.5 * z.squaredNorm() - half_logdet - kLogSqrt2Pi * static_cast<double>(ny);
    r.increments.push_back(inc);
    r.log_likelihood += inc;
    r.predicted_obs_means.push_back(yhat);
    r.predicted_obs_covs.push_back(s);

    const Eigen::MatrixXd k = llt.solve(m.C * p).transpose();  // P C^T S^-1
    x += k * e;
    // Joseph form keeps P symmetric PD
    const Eigen::MatrixXd ikc = I - k * m.C;
    p = ikc * p * ikc.transpose() + k * m.R * k.transpose();
    r.filtered_means.push_back(x);
    r.filtered_covs.push_back(p);
  }
  return r;
}

}  // namespace adpf
