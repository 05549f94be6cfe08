#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "adpf/adapt/levenberg_marquardt.hpp"
#include "adpf/core/model.hpp"

namespace adpf {

enum class CurvatureMethod { gauss_newton, finite_difference };

template <int Du, int Dy>
struct ModeEstimate {
  Eigen::Matrix<double, Du, 1> u_mode;
  Eigen::Matrix<double, Du, Du> curvature;  // -(d2 l / du2)^-1
  Eigen::Matrix<double, Dy, 1> implied_obs_mean;
  bool converged = false;
  bool floored = false;  // curvature needed eigenvalue repair
  int iterations = 0;
};

/// Inverts a symmetric precision matrix after raising its eigenvalues to at
/// least `floor`. Returns true when flooring was needed.
template <int D>
bool floored_inverse(const Eigen::Matrix<double, D, D>& precision, Eigen::Matrix<double, D, D>& out,
                     double floor = 1e-8) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, D, D>> es(0.5 * (precision + precision.transpose()));
  Eigen::Matrix<double, D, 1> ev = es.eigenvalues();
  bool floored = false;
  for (int i = 0; i < ev.size(); ++i) {
    if (!(ev[i] >= floor)) {
      ev[i] = floor;
      floored = true;
    }
  }
  out = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return floored;
}

/// Negative inverse Hessian of l(u) at `mode`.
/// gauss_newton: (J^T J)^-1 from the scaled residuals, J including the prior rows.
/// finite_difference: central differences of l with step 1e-5.
template <GaussianObservationModel M>
Eigen::Matrix<double, M::disturbance_dim, M::disturbance_dim> laplace_curvature(
    const typename M::Disturbance& mode, const typename M::State& x_prev,
    const typename M::Observation& y, CountedTransition<M>& h,
    CurvatureMethod method = CurvatureMethod::gauss_newton, bool* floored = nullptr) {
  constexpr int du = M::disturbance_dim;
  using Mat = Eigen::Matrix<double, du, du>;
  Mat prec;
  if (method == CurvatureMethod::gauss_newton) {
    const auto v = residual_and_jacobian(mode, x_prev, y, h);
    prec = v.J.transpose() * v.J;
  } else {
    const double s = 1e-5;
    auto l = [&](const typename M::Disturbance& u) { return objective_log_density(u, x_prev, y, h); };
    const double l0 = l(mode);
    for (int i = 0; i < du; ++i) {
      typename M::Disturbance up = mode, dn = mode;
      up[i] += s;
      dn[i] -= s;
      prec(i, i) = -(l(up) - 2.0 * l0 + l(dn)) / (s * s);
      for (int j = 0; j < i; ++j) {
        typename M::Disturbance pp = mode, pm = mode, mp = mode, mm = mode;
        pp[i] += s; pp[j] += s;
        pm[i] += s; pm[j] -= s;
        mp[i] -= s; mp[j] += s;
        mm[i] -= s; mm[j] -= s;
        prec(i, j) = prec(j, i) = -(l(pp) - l(pm) - l(mp) + l(mm)) / (4.0 * s * s);
      }
    }
  }
  Mat cov;
  const bool f = floored_inverse<du>(prec, cov);
  if (floored) *floored = f;
  return cov;
}

template <GaussianObservationModel M>
ModeEstimate<M::disturbance_dim, M::obs_dim> find_mode_lm_from(
    const typename M::State& x_prev, const typename M::Observation& y, CountedTransition<M>& h,
    const LMConfig& cfg, const typename M::Disturbance& u0,
    CurvatureMethod method = CurvatureMethod::gauss_newton) {
  constexpr int du = M::disturbance_dim, dy = M::obs_dim;
  auto f = [&](const typename M::Disturbance& u) { return residual_and_jacobian(u, x_prev, y, h); };
  const auto lm = levenberg_marquardt<du, dy + du>(f, u0, cfg);
  ModeEstimate<du, dy> m;
  m.u_mode = lm.u;
  m.converged = lm.converged;
  m.iterations = lm.iterations;
  // implied mean recovered from the stored residual, no extra transition call
  m.implied_obs_mean = y - lm.at.r.template head<dy>().cwiseProduct(h.model().observation_sd());
  if (method == CurvatureMethod::gauss_newton) {
    const Eigen::Matrix<double, du, du> prec = lm.at.J.transpose() * lm.at.J;
    m.floored = floored_inverse<du>(prec, m.curvature);
  } else {
    m.curvature = laplace_curvature(lm.u, x_prev, y, h, method, &m.floored);
  }
  return m;
}

/// Levenberg-Marquardt search for the mode of l(u) from u0 ~ N(0, init_std^2 I),
/// followed by the Laplace curvature at the result.
template <GaussianObservationModel M>
ModeEstimate<M::disturbance_dim, M::obs_dim> find_mode_lm(
    const typename M::State& x_prev, const typename M::Observation& y, CountedTransition<M>& h,
    const LMConfig& cfg, RandomStream& rng, CurvatureMethod method = CurvatureMethod::gauss_newton) {
  typename M::Disturbance u0;
  fill_standard_normal(u0, rng);
  u0 *= cfg.init_std;
  return find_mode_lm_from(x_prev, y, h, cfg, u0, method);
}

}  // namespace adpf
