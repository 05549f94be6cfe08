#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/errors.hpp"
#include "adpf/core/model.hpp"
#include "adpf/core/parameters.hpp"
#include "adpf/filters/kalman.hpp"

namespace adpf {

// x_t = phi x_{t-1} + sigma_u (u_t + delta u_t^2),  y_t = x_t + sigma_eps e_t
struct Qar1Params {
  double phi = 0.6;
  double sigma_u = 1.0;
  double sigma_eps = 1.0;
  double delta = 0.0;

  bool valid() const {
    return std::abs(phi) < 1.0 && sigma_u > 0.0 && sigma_eps > 0.0 && std::isfinite(delta);
  }

  ParameterVector to_vector() const {
    return {{"phi", phi, Support::interval(-1.0, 1.0)},
            {"sigma_u", sigma_u, Support::positive()},
            {"sigma_eps", sigma_eps, Support::positive()},
            {"delta", delta, Support::real()}};
  }

  static Qar1Params from(const ParameterVector& p) { return from(p, Qar1Params{}); }
  static Qar1Params from(const ParameterVector& p, const Qar1Params& base) {
    return {p.get("phi", base.phi), p.get("sigma_u", base.sigma_u), p.get("sigma_eps", base.sigma_eps),
            p.get("delta", base.delta)};
  }
};

inline double qar1_transition(double x_prev, double u, const Qar1Params& p) {
  return p.phi * x_prev + p.sigma_u * (u + p.delta * u * u);
}

struct Moments1 {
  double mean;
  double variance;
};

/// Mean and variance of y_t given x_{t-1}: E(u + delta u^2) = delta and
/// Var(u + delta u^2) = 1 + 2 delta^2 for standard normal u.
inline Moments1 qar1_first_stage_moments(double x_prev, const Qar1Params& p) {
  return {p.phi * x_prev + p.sigma_u * p.delta,
          p.sigma_eps * p.sigma_eps + p.sigma_u * p.sigma_u * (1.0 + 2.0 * p.delta * p.delta)};
}

class Qar1Model {
 public:
  static constexpr int state_dim = 1, disturbance_dim = 1, obs_dim = 1;
  using State = Eigen::Matrix<double, 1, 1>;
  using Disturbance = Eigen::Matrix<double, 1, 1>;
  using Observation = Eigen::Matrix<double, 1, 1>;

  explicit Qar1Model(Qar1Params p = {}) : p_(p) {
    if (!p_.valid()) throw std::invalid_argument("quadratic AR(1) parameters outside support");
  }

  const Qar1Params& params() const { return p_; }

  State transition(const State& x, const Disturbance& u) const {
    return State(qar1_transition(x[0], u[0], p_));
  }

  double log_measurement_density(const Observation& y, const State& x) const {
    return normal_logpdf(y[0], x[0], p_.sigma_eps);
  }

  double first_stage_log_density(const Observation& y, const State& x_prev) const {
    const auto m = qar1_first_stage_moments(x_prev[0], p_);
    return normal_logpdf(y[0], m.mean, std::sqrt(m.variance));
  }

  Observation observation_mean(const State& x) const { return x; }
  Observation observation_sd() const { return Observation(p_.sigma_eps); }

  Eigen::Matrix<double, 1, 1> observation_jacobian(const State&, const Disturbance& u) const {
    return Eigen::Matrix<double, 1, 1>(p_.sigma_u * (1.0 + 2.0 * p_.delta * u[0]));
  }

  // Gaussian with the stationary mean and variance (exact when delta = 0).
  double initial_mean() const { return p_.sigma_u * p_.delta / (1.0 - p_.phi); }
  double initial_variance() const {
    return p_.sigma_u * p_.sigma_u * (1.0 + 2.0 * p_.delta * p_.delta) / (1.0 - p_.phi * p_.phi);
  }

  State sample_initial(RandomStream& rng) const {
    return State(initial_mean() + std::sqrt(initial_variance()) * rng.normal());
  }

  Observation sample_observation(const State& x, RandomStream& rng) const {
    return Observation(x[0] + p_.sigma_eps * rng.normal());
  }

 private:
  Qar1Params p_;
};

/// The linear-Gaussian model obtained by dropping delta, with the stationary
/// prior for x_0.
inline LinearGaussianModel qar1_linear_gaussian(const Qar1Params& p) {
  LinearGaussianModel m;
  m.A = Eigen::MatrixXd::Constant(1, 1, p.phi);
  m.b = Eigen::VectorXd::Zero(1);
  m.Q = Eigen::MatrixXd::Constant(1, 1, p.sigma_u * p.sigma_u);
  m.C = Eigen::MatrixXd::Ones(1, 1);
  m.c = Eigen::VectorXd::Zero(1);
  m.R = Eigen::MatrixXd::Constant(1, 1, p.sigma_eps * p.sigma_eps);
  set_stationary_prior(m);
  return m;
}

/// Exact p(u | y, x) for delta = 0. With it, and g(y|x) = p(y|x), the ADPF
/// second-stage weights are constant.
class Qar1ExactAdapter {
 public:
  explicit Qar1ExactAdapter(const Qar1Params& p) : p_(p) {
    if (p.delta != 0.0) throw std::invalid_argument("exact disturbance posterior needs delta = 0");
  }

  void prepare(std::span<const Qar1Model::State> xs, const Qar1Model::Observation& y,
               CountedTransition<Qar1Model>&, RandomStream&) {
    xs_.assign(xs.begin(), xs.end());
    y_ = y[0];
  }

  ProposalDraw<Qar1Model::Disturbance> sample(std::size_t k, RandomStream& rng) const {
    const double su2 = p_.sigma_u * p_.sigma_u, se2 = p_.sigma_eps * p_.sigma_eps;
    const double mean = p_.sigma_u * (y_ - p_.phi * xs_[k][0]) / (su2 + se2);
    const double sd = std::sqrt(se2 / (su2 + se2));
    const double u = mean + sd * rng.normal();
    return {Qar1Model::Disturbance(u), normal_logpdf(u, mean, sd)};
  }

 private:
  Qar1Params p_;
  std::vector<Qar1Model::State> xs_;
  double y_ = 0.0;
};

}  // namespace adpf
