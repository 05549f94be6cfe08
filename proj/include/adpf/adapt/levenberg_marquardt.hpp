#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/model.hpp"

namespace adpf {

struct LMConfig {
  double nu0 = 10.0;
  double nu_factor = 10.0;
  double grad_tol = 1e-3;  // on ||J^T r||
  double ssr_tol = 1e-5;
  int max_iter = 10;
  double init_std = 2.0;
};

enum class LMStop { gradient, ssr, max_iter };

struct LMIteration {
  double nu;  // damping used for this step
  bool accepted;
  double ssr;  // after the step if accepted, else the incumbent's
};

template <int Du, int Dr>
struct LMValue {
  Eigen::Matrix<double, Dr, 1> r;
  Eigen::Matrix<double, Dr, Du> J;
};

template <int Du, int Dr>
struct LMResult {
  Eigen::Matrix<double, Du, 1> u;
  LMValue<Du, Dr> at;  // residual and Jacobian at u
  double ssr = 0.0;
  int iterations = 0;
  bool converged = false;
  LMStop stop = LMStop::max_iter;
  std::vector<LMIteration> trace;
};

/// Minimizes ||r(u)||^2 with the damped step u - (J^T J + nu I)^-1 J^T r.
/// A step is accepted when it lowers the sum of squares; nu is divided by
/// nu_factor on acceptance and multiplied on rejection.
template <int Du, int Dr, class F>
LMResult<Du, Dr> levenberg_marquardt(F&& f, const Eigen::Matrix<double, Du, 1>& u0, const LMConfig& cfg,
                                     bool record_trace = false) {
  using U = Eigen::Matrix<double, Du, 1>;
  using A = Eigen::Matrix<double, Du, Du>;
  LMResult<Du, Dr> res;
  res.u = u0;
  res.at = f(res.u);
  res.ssr = res.at.r.squaredNorm();
  double nu = cfg.nu0;

  auto check = [&] {
    if (!std::isfinite(res.ssr)) return false;
    if ((res.at.J.transpose() * res.at.r).norm() < cfg.grad_tol) {
      res.stop = LMStop::gradient;
      return true;
    }
    if (res.ssr < cfg.ssr_tol) {
      res.stop = LMStop::ssr;
      return true;
    }
    return false;
  };

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (check()) {
      res.converged = true;
      return res;
    }
    const U g = res.at.J.transpose() * res.at.r;
    A h = res.at.J.transpose() * res.at.J;
    h.diagonal().array() += nu;
    const U u_new = res.u - h.ldlt().solve(g);
    auto val = f(u_new);
    const double ssr_new = val.r.squaredNorm();
    const bool accept = std::isfinite(ssr_new) && (ssr_new < res.ssr || !std::isfinite(res.ssr));
    if (record_trace) res.trace.push_back({nu, accept, accept ? ssr_new : res.ssr});
    ++res.iterations;
    if (accept) {
      res.u = u_new;
      res.at = std::move(val);
      res.ssr = ssr_new;
      nu /= cfg.nu_factor;
    } else {
      nu *= cfg.nu_factor;
    }
  }
  res.converged = check();
  if (!res.converged) res.stop = LMStop::max_iter;
  return res;
}

/// Scaled residuals of the mode-search objective:
/// r(u) = [(y - mean(h(x_prev, u))) / sd ; u], so -r^T r / 2 is l(u) up to a constant.
/// The Jacobian is analytic when the model provides one (charged as one
/// evaluation), otherwise forward differences.
template <GaussianObservationModel M>
LMValue<M::disturbance_dim, M::obs_dim + M::disturbance_dim> residual_and_jacobian(
    const typename M::Disturbance& u, const typename M::State& x_prev,
    const typename M::Observation& y, CountedTransition<M>& h, bool analytic = true) {
  constexpr int du = M::disturbance_dim, dy = M::obs_dim;
  const M& model = h.model();
  const auto sd = model.observation_sd();
  LMValue<du, dy + du> v;
  const typename M::Observation mu = model.observation_mean(h(x_prev, u));
  v.r.template head<dy>() = (y - mu).cwiseQuotient(sd);
  v.r.template tail<du>() = u;
  v.J.template bottomRows<du>().setIdentity();
  if constexpr (HasObservationJacobian<M>) {
    if (analytic) {
      h.charge(1);
      v.J.template topRows<dy>() = -(sd.cwiseInverse().asDiagonal() * model.observation_jacobian(x_prev, u));
      return v;
    }
  }
  for (int i = 0; i < du; ++i) {
    typename M::Disturbance up = u;
    const double step = 1e-7 * std::max(1.0, std::abs(u[i]));
    up[i] += step;
    const typename M::Observation mu_i = model.observation_mean(h(x_prev, up));
    v.J.template topRows<dy>().col(i) = -((mu_i - mu) / step).cwiseQuotient(sd);
  }
  return v;
}

}  // namespace adpf
