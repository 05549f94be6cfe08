#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/errors.hpp"
#include "adpf/core/model.hpp"
#include "adpf/core/parameters.hpp"

namespace adpf {

/// Habit asset-pricing parameters in quarterly decimal units.
struct HabitParams {
  double gamma = 2.0;
  double g = 0.019 / 4.0;
  double r_f = 0.01 / 4.0;
  double phi = 0.8;
  double sigma_nu = 0.008;
  double sigma_eta = 0.001;
  double sigma_eps = 0.05;

  bool valid() const {
    return gamma > 0.0 && g > 0.0 && r_f > 0.0 && phi > 0.0 && phi < 1.0 && sigma_nu > 0.0 && sigma_eta > 0.0 &&
           sigma_eps > 0.0;
  }

  ParameterVector to_vector() const {
    return {{"gamma", gamma, Support::positive()},      {"g", g, Support::positive()},
            {"r_f", r_f, Support::positive()},          {"phi", phi, Support::unit_interval()},
            {"sigma_nu", sigma_nu, Support::positive()}, {"sigma_eta", sigma_eta, Support::positive()},
            {"sigma_eps", sigma_eps, Support::positive()}};
  }

  static HabitParams from(const ParameterVector& p) { return from(p, HabitParams{}); }
  static HabitParams from(const ParameterVector& p, const HabitParams& base) {
    HabitParams h = base;
    h.gamma = p.get("gamma", base.gamma);
    h.g = p.get("g", base.g);
    h.r_f = p.get("r_f", base.r_f);
    h.phi = p.get("phi", base.phi);
    h.sigma_nu = p.get("sigma_nu", base.sigma_nu);
    h.sigma_eta = p.get("sigma_eta", base.sigma_eta);
    h.sigma_eps = p.get("sigma_eps", base.sigma_eps);
    return h;
  }
};

/// Steady-state surplus ratio sigma_nu sqrt(gamma / (1 - phi)).
inline double habit_sbar(const HabitParams& p) { return p.sigma_nu * std::sqrt(p.gamma / (1.0 - p.phi)); }

/// Discount factor implied by the risk-free rate
/// r_f = -log(beta) + gamma g - (gamma / Sbar)^2 sigma_nu^2 / 2.
/// Substituting Sbar the last term is gamma (1 - phi) / 2.
inline double rf_to_beta(const HabitParams& p) {
  const double sbar = habit_sbar(p);
  const double k = p.gamma / sbar;
  const double b = std::exp(-p.r_f + p.gamma * p.g - 0.5 * k * k * p.sigma_nu * p.sigma_nu);
  if (!(b > 0.0 && b < 1.0)) throw BetaOutOfRange("implied discount factor " + std::to_string(b) + " not in (0,1)");
  return b;
}

struct GammaCoefficients {
  double g0, g1, g2, g3;

  double level(double s) const { return g0 + s * (g1 + s * (g2 + s * g3)); }
};

/// Third-order Taylor coefficients at s = 0 of the price-dividend ratio solving
/// the deterministic Euler recursion, G = exp(g).
inline GammaCoefficients gamma_coefficients(const HabitParams& p) {
  const double bbar = rf_to_beta(p);
  const double G = std::exp(p.g);
  const double gg = std::pow(G, p.gamma);
  const double a = bbar * G;
  const double phi = p.phi;
  const double d0 = gg - a, d1 = gg - phi * a, d2 = gg - phi * phi * a, d3 = gg - phi * phi * phi * a;
  if (!(d0 > 0.0 && d1 > 0.0 && d2 > 0.0 && d3 > 0.0))
    throw DenominatorNonPositive("price-dividend expansion is explosive at these parameters");
  GammaCoefficients c;
  c.g0 = a / d0;
  c.g1 = (1.0 - phi) * gg * a * p.gamma / (d0 * d1);
  // the published form has (G^gamma - phi bbar G) in the last factor; phi^2 is
  // what matches the recursion
  c.g2 = 0.5 * c.g0 * c.g1 * (1.0 - phi) * d0 * p.gamma * (gg + phi * a) / (a * d2);
  const double om = 1.0 - phi;
  c.g3 = om * om * om * gg * a * p.gamma * p.gamma * p.gamma *
         (gg * gg + 2.0 * a * phi * gg + 2.0 * a * phi * phi * gg + a * a * phi * phi * phi) /
         (6.0 * d0 * d1 * d2 * d3);
  return c;
}

/// Third-order expansion of log(P/D) in s derived from the level coefficients:
/// log G0 + l1 s + l2 s^2 + l3 s^3.
struct LogPdExpansion {
  double l0, l1, l2, l3;

  explicit LogPdExpansion(const GammaCoefficients& c) {
    const double r1 = c.g1 / c.g0, r2 = c.g2 / c.g0, r3 = c.g3 / c.g0;
    l0 = std::log(c.g0);
    l1 = r1;
    l2 = r2 - 0.5 * r1 * r1;
    l3 = r3 - r1 * r2 + r1 * r1 * r1 / 3.0;
  }

  double operator()(double s) const { return l0 + s * (l1 + s * (l2 + s * l3)); }
  double derivative(double s) const { return l1 + s * (2.0 * l2 + 3.0 * s * l3); }
};

struct HabitState {
  double s = 0.0;  // log surplus ratio deviation
  double b = 0.0;  // log discount deviation
};

struct HabitStep {
  HabitState state;
  bool reflected = false;
};

namespace detail {

// s' = phi s + (sqrt(1 - 2 s) / Sbar - 1) nu, with s' > 1/2 reflected to 1 - s'.
inline double habit_s_next(double s, double nu, double phi, double sbar, bool* reflected = nullptr) {
  double sn = phi * s + (std::sqrt(std::max(0.0, 1.0 - 2.0 * s)) / sbar - 1.0) * nu;
  const bool r = sn > 0.5;
  if (r) sn = 1.0 - sn;
  if (reflected) *reflected = r;
  return sn;
}

}  // namespace detail

inline HabitStep habit_transition(const HabitState& x, double nu, double eps, const HabitParams& p) {
  if (x.s > 0.5) throw DomainViolation("surplus deviation above 1/2");
  HabitStep out;
  out.state.s = detail::habit_s_next(x.s, nu, p.phi, habit_sbar(p), &out.reflected);
  out.state.b = x.b + eps;
  return out;
}

/// Change in log(P/D) implied by two full states.
inline double habit_implied_dlog_pd(const HabitState& now, const HabitState& prev, const LogPdExpansion& lpd) {
  return now.b - prev.b + lpd(now.s) - lpd(prev.s);
}

/// log p(dlog_pd, dlog_c | s_t, s_{t-1}, nu_t) with the discount shock b
/// marginalized: its increment eps_t ~ N(0, sigma_eps^2) is the only noise in
/// dlog_pd, and dlog_c = g + nu_t + eta_t.
inline double habit_observation_logdensity(double dlog_pd, double dlog_c, double s, double s_prev, double nu,
                                           const HabitParams& p, const LogPdExpansion& lpd) {
  const double l = normal_logpdf(dlog_pd, lpd(s) - lpd(s_prev), p.sigma_eps) +
                   normal_logpdf(dlog_c, p.g + nu, p.sigma_eta);
  return std::isfinite(l) ? l : kNegInf;
}

/// Nodes and weights for E f(z), z ~ N(0, 1) (Golub-Welsch).
inline void gauss_hermite_normal(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jm(k - 1, k) = jm(k, k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    weights[i] = v * v;
  }
}

/// Filtering form of the habit model. State (s_t, s_{t-1}, nu_t); disturbance
/// u = nu / sigma_nu; observation (dlog_pd, dlog_c).
class HabitModel {
 public:
  static constexpr int state_dim = 3, disturbance_dim = 1, obs_dim = 2;
  using State = Eigen::Vector3d;
  using Disturbance = Eigen::Matrix<double, 1, 1>;
  using Observation = Eigen::Vector2d;

  explicit HabitModel(const HabitParams& p, double init_sd = 1e-3, int quadrature_nodes = 16)
      : p_(p), gamma_(gamma_coefficients(p)), lpd_(gamma_), sbar_(habit_sbar(p)), init_sd_(init_sd) {
    if (!p.valid()) throw std::invalid_argument("habit parameters outside support");
    gauss_hermite_normal(quadrature_nodes, gh_nodes_, gh_weights_);
  }

  const HabitParams& params() const { return p_; }
  const GammaCoefficients& gamma() const { return gamma_; }
  const LogPdExpansion& log_pd() const { return lpd_; }
  double sbar() const { return sbar_; }

  State transition(const State& x, const Disturbance& u) const {
    const double nu = p_.sigma_nu * u[0];
    return State(detail::habit_s_next(x[0], nu, p_.phi, sbar_), x[0], nu);
  }

  Observation observation_mean(const State& x) const {
    return Observation(lpd_(x[0]) - lpd_(x[1]), p_.g + x[2]);
  }
  Observation observation_sd() const { return Observation(p_.sigma_eps, p_.sigma_eta); }

  double log_measurement_density(const Observation& y, const State& x) const {
    return habit_observation_logdensity(y[0], y[1], x[0], x[1], x[2], p_, lpd_);
  }

  Eigen::Matrix<double, 2, 1> observation_jacobian(const State& x_prev, const Disturbance& u) const {
    const double nu = p_.sigma_nu * u[0];
    bool reflected = false;
    const double sn = detail::habit_s_next(x_prev[0], nu, p_.phi, sbar_, &reflected);
    double ds = (std::sqrt(std::max(0.0, 1.0 - 2.0 * x_prev[0])) / sbar_ - 1.0) * p_.sigma_nu;
    if (reflected) ds = -ds;
    return Eigen::Matrix<double, 2, 1>(lpd_.derivative(sn) * ds, p_.sigma_nu);
  }

  /// Bivariate Gaussian matched to the one-step-ahead moments of y, the
  /// integral over nu done by Gauss-Hermite quadrature.
  double first_stage_log_density(const Observation& y, const State& x_prev) const {
    const double base = lpd_(x_prev[0]);
    double m = 0.0, m2 = 0.0, c = 0.0;
    for (std::size_t i = 0; i < gh_nodes_.size(); ++i) {
      const double nu = p_.sigma_nu * gh_nodes_[i];
      const double f = lpd_(detail::habit_s_next(x_prev[0], nu, p_.phi, sbar_)) - base;
      m += gh_weights_[i] * f;
      m2 += gh_weights_[i] * f * f;
      c += gh_weights_[i] * f * nu;
    }
    const double v1 = std::max(m2 - m * m, 0.0) + p_.sigma_eps * p_.sigma_eps;
    const double v2 = p_.sigma_nu * p_.sigma_nu + p_.sigma_eta * p_.sigma_eta;
    const double e1 = y[0] - m, e2 = y[1] - p_.g;
    const double det = v1 * v2 - c * c;
    if (!(det > 0.0)) return kNegInf;
    const double q = (v2 * e1 * e1 - 2.0 * c * e1 * e2 + v1 * e2 * e2) / det;
    const double l = -0.5 * q - 0.5 * std::log(det) - 2.0 * kLogSqrt2Pi;
    return std::isfinite(l) ? l : kNegInf;
  }

  State sample_initial(RandomStream& rng) const {
    const double s = init_sd_ * rng.normal();
    return State(s, s, 0.0);
  }

  Observation sample_observation(const State& x, RandomStream& rng) const {
    const Observation m = observation_mean(x);
    return Observation(m[0] + p_.sigma_eps * rng.normal(), m[1] + p_.sigma_eta * rng.normal());
  }

 private:
  HabitParams p_;
  GammaCoefficients gamma_;
  LogPdExpansion lpd_;
  double sbar_;
  double init_sd_;
  std::vector<double> gh_nodes_, gh_weights_;
};

}  // namespace adpf
