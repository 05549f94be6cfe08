#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adpf/core/errors.hpp"
#include "adpf/core/model.hpp"
#include "adpf/core/parameters.hpp"
#include "adpf/filters/kalman.hpp"

namespace adpf {

/// x_t = d + E x + F eps + (I3 (x) x') G x + (I3 (x) x') H eps + (I3 (x) eps') J eps
/// stored per output equation i: quadratic x' G[i] x, cross term eps * x' H[i],
/// and J[i] eps^2. State order (c, k, a).
struct GrowthCoefficients {
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  Eigen::Matrix3d E = Eigen::Matrix3d::Zero();
  Eigen::Vector3d F = Eigen::Vector3d::Zero();
  std::array<Eigen::Matrix3d, 3> G{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};
  std::array<Eigen::Vector3d, 3> H{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  Eigen::Vector3d J = Eigen::Vector3d::Zero();
  Eigen::Vector3d steady_state = Eigen::Vector3d::Zero();
  std::string provenance;

  bool finite() const {
    bool ok = d.allFinite() && E.allFinite() && F.allFinite() && J.allFinite() && steady_state.allFinite();
    for (int i = 0; i < 3; ++i) ok = ok && G[i].allFinite() && H[i].allFinite();
    return ok;
  }
};

inline Eigen::Vector3d growth_transition(const Eigen::Vector3d& x, double eps, const GrowthCoefficients& c) {
  Eigen::Vector3d out = c.d + c.E * x + c.F * eps + c.J * (eps * eps);
  for (int i = 0; i < 3; ++i) out[i] += x.dot(c.G[i] * x) + eps * x.dot(c.H[i]);
  return out;
}

/// Conditional mean and variance of the first state (consumption) one step
/// ahead, in the closed form used for the first-stage density. The variance
/// keeps J_1^2 sigma^4 rather than the exact 2 J_1^2 sigma^4.
inline std::pair<double, double> growth_conditional_moments(const Eigen::Vector3d& x, const GrowthCoefficients& c,
                                                            double sigma_eps) {
  const double s2 = sigma_eps * sigma_eps;
  const double mean = c.d[0] + c.E.row(0).dot(x) + x.dot(c.G[0] * x) + s2 * c.J[0];
  const double xh = x.dot(c.H[0]);
  const double var = s2 * c.F[0] * c.F[0] + 2.0 * s2 * c.F[0] * xh + s2 * xh * xh + s2 * s2 * c.J[0] * c.J[0];
  return {mean, var};
}

struct GrowthParams {
  double alpha = 1.0 / 3.0;
  double rho = 0.8;
  double delta = 0.05;
  double sigma_eps = 0.02;
  double beta = 0.99;
  double sigma_nu2 = 1e-8;

  bool valid() const {
    return alpha > 0.0 && alpha < 1.0 && rho > 0.0 && rho < 1.0 && delta >= 0.0 && delta <= 1.0 &&
           sigma_eps > 0.0 && sigma_nu2 > 0.0;
  }

  ParameterVector to_vector() const {
    return {{"alpha", alpha, Support::unit_interval()},
            {"rho", rho, Support::unit_interval()},
            {"delta", delta, Support::closed_unit_interval()},
            {"sigma_eps", sigma_eps, Support::positive()}};
  }

  static GrowthParams from(const ParameterVector& p) { return from(p, GrowthParams{}); }
  static GrowthParams from(const ParameterVector& p, const GrowthParams& base) {
    GrowthParams g = base;
    g.alpha = p.get("alpha", base.alpha);
    g.rho = p.get("rho", base.rho);
    g.delta = p.get("delta", base.delta);
    g.sigma_eps = p.get("sigma_eps", base.sigma_eps);
    return g;
  }

  double get(const std::string& name) const {
    if (name == "alpha") return alpha;
    if (name == "rho") return rho;
    if (name == "delta") return delta;
    if (name == "sigma_eps") return sigma_eps;
    throw std::out_of_range("unknown growth parameter " + name);
  }
};

/// A bundled coefficient file: coefficients at its calibration plus, optionally,
/// their derivatives with respect to some parameters.
struct GrowthFixture {
  GrowthCoefficients base;
  GrowthParams params;
  std::vector<std::string> tangent_parameters;
  std::vector<GrowthCoefficients> tangent;  // one per tangent parameter
};

namespace detail {

inline std::vector<double> read_array(const nlohmann::json& j, const char* key, std::size_t n) {
  if (!j.contains(key) || !j[key].is_array()) throw FixtureError(std::string("fixture lacks array ") + key);
  std::vector<double> v;
  for (const auto& e : j[key]) {
    if (!e.is_number()) throw FixtureError(std::string("non-numeric entry in ") + key);
    v.push_back(e.get<double>());
  }
  if (v.size() != n) {
    throw FixtureError(std::string("array ") + key + " has " + std::to_string(v.size()) + " entries, expected " +
                       std::to_string(n));
  }
  return v;
}

inline GrowthCoefficients coefficients_from_json(const nlohmann::json& j) {
  GrowthCoefficients c;
  const auto d = read_array(j, "d", 3), e = read_array(j, "E", 9), f = read_array(j, "F", 3);
  const auto g = read_array(j, "G", 27), h = read_array(j, "H", 9), jj = read_array(j, "J", 3);
  const auto ss = read_array(j, "steady_state", 3);
  for (int i = 0; i < 3; ++i) {
    c.d[i] = d[i];
    c.F[i] = f[i];
    c.J[i] = jj[i];
    c.steady_state[i] = ss[i];
    for (int k = 0; k < 3; ++k) {
      c.E(i, k) = e[3 * i + k];
      c.H[i][k] = h[3 * i + k];
      for (int l = 0; l < 3; ++l) c.G[i](k, l) = g[9 * i + 3 * k + l];
    }
  }
  if (!c.finite()) throw FixtureError("fixture has non-finite coefficients");
  return c;
}

}  // namespace detail

inline GrowthFixture parse_growth_fixture(const nlohmann::json& j, const std::string& id = "fixture") {
  if (j.value("format", "") != "growth-coefficients/1") throw FixtureError("unknown fixture format");
  if (j.value("layout", "") != "row-major-output-blocks") throw FixtureError("unsupported fixture layout");
  if (!j.contains("dims") || j["dims"].value("state", 0) != 3 || j["dims"].value("shock", 0) != 1)
    throw FixtureError("fixture dims must be state 3, shock 1");
  GrowthFixture fx;
  fx.base = detail::coefficients_from_json(j);
  fx.base.provenance = id;
  if (j.contains("parameters")) {
    const auto& p = j["parameters"];
    fx.params.alpha = p.value("alpha", fx.params.alpha);
    fx.params.rho = p.value("rho", fx.params.rho);
    fx.params.delta = p.value("delta", fx.params.delta);
    fx.params.sigma_eps = p.value("sigma_eps", fx.params.sigma_eps);
    fx.params.beta = p.value("beta", fx.params.beta);
    fx.params.sigma_nu2 = p.value("sigma_nu2", fx.params.sigma_nu2);
  }
  if (j.contains("tangent")) {
    const auto& t = j["tangent"];
    fx.tangent_parameters = t.at("parameters").get<std::vector<std::string>>();
    const std::size_t np = fx.tangent_parameters.size();
    for (std::size_t k = 0; k < np; ++k) {
      nlohmann::json one;
      for (const char* key : {"d", "E", "F", "G", "H", "J", "steady_state"}) {
        if (!t.contains(key) || t[key].size() != np) throw FixtureError(std::string("tangent block lacks ") + key);
        one[key] = t[key][k];
      }
      fx.tangent.push_back(detail::coefficients_from_json(one));
    }
  }
  return fx;
}

inline GrowthFixture load_growth_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureError("cannot open fixture " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FixtureError(std::string("malformed fixture: ") + e.what());
  }
  return parse_growth_fixture(j, path);
}

#ifdef ADPF_DATA_DIR
inline std::string default_growth_fixture_path() { return std::string(ADPF_DATA_DIR) + "/growth_fixture.json"; }
#endif

/// Maps structural parameters to coefficients. Throws DomainViolation when it
/// cannot serve the request; samplers read that as a rejected proposal.
using GrowthProvider = std::function<GrowthCoefficients(const GrowthParams&)>;

/// Serves the fixture's coefficients only at its own calibration.
inline GrowthProvider fixture_provider(const GrowthFixture& fx, double tol = 1e-12) {
  return [fx, tol](const GrowthParams& p) {
    for (const char* n : {"alpha", "rho", "delta", "sigma_eps"}) {
      if (std::abs(p.get(n) - fx.params.get(n)) > tol)
        throw DomainViolation("fixture provider only serves its calibration");
    }
    return fx.base;
  };
}

/// First-order expansion of the coefficients in the parameters around the
/// fixture calibration. Requests further than `radius` (relative, per
/// parameter) from the calibration are refused.
inline GrowthProvider tangent_provider(const GrowthFixture& fx, double radius = 0.3) {
  if (fx.tangent.empty()) throw FixtureError("fixture has no tangent block");
  return [fx, radius](const GrowthParams& p) {
    GrowthCoefficients c = fx.base;
    for (std::size_t k = 0; k < fx.tangent_parameters.size(); ++k) {
      const std::string& n = fx.tangent_parameters[k];
      const double at = fx.params.get(n);
      const double dt = p.get(n) - at;
      if (std::abs(dt) > radius * std::abs(at)) throw DomainViolation("outside tangent provider trust region");
      const auto& t = fx.tangent[k];
      c.d += dt * t.d;
      c.E += dt * t.E;
      c.F += dt * t.F;
      c.J += dt * t.J;
      c.steady_state += dt * t.steady_state;
      for (int i = 0; i < 3; ++i) {
        c.G[i] += dt * t.G[i];
        c.H[i] += dt * t.H[i];
      }
    }
    c.provenance = fx.base.provenance + "+tangent";
    return c;
  };
}

/// Second-order growth model with y_t = c_t + nu_t. The disturbance is
/// u = eps / sigma_eps.
class GrowthModel {
 public:
  static constexpr int state_dim = 3, disturbance_dim = 1, obs_dim = 1;
  using State = Eigen::Vector3d;
  using Disturbance = Eigen::Matrix<double, 1, 1>;
  using Observation = Eigen::Matrix<double, 1, 1>;

  GrowthModel(GrowthCoefficients c, double sigma_eps, double sigma_nu2 = 1e-8, double init_scale = 1e-3)
      : c_(std::move(c)), sigma_eps_(sigma_eps), sigma_nu_(std::sqrt(sigma_nu2)), init_scale_(init_scale) {
    if (!(sigma_eps > 0.0) || !(sigma_nu2 > 0.0)) throw std::invalid_argument("growth noise scales must be positive");
    if (!c_.finite()) throw std::invalid_argument("growth coefficients must be finite");
  }

  const GrowthCoefficients& coefficients() const { return c_; }
  double sigma_eps() const { return sigma_eps_; }
  double sigma_nu() const { return sigma_nu_; }

  State transition(const State& x, const Disturbance& u) const { return growth_transition(x, sigma_eps_ * u[0], c_); }

  double log_measurement_density(const Observation& y, const State& x) const {
    const double l = normal_logpdf(y[0], x[0], sigma_nu_);
    return std::isfinite(l) ? l : kNegInf;
  }

  double first_stage_log_density(const Observation& y, const State& x_prev) const {
    const auto [m, v] = growth_conditional_moments(x_prev, c_, sigma_eps_);
    const double l = normal_logpdf(y[0], m, std::sqrt(v + sigma_nu_ * sigma_nu_));
    return std::isfinite(l) ? l : kNegInf;
  }

  Observation observation_mean(const State& x) const { return Observation(x[0]); }
  Observation observation_sd() const { return Observation(sigma_nu_); }

  Eigen::Matrix<double, 1, 1> observation_jacobian(const State& x_prev, const Disturbance& u) const {
    const double eps = sigma_eps_ * u[0];
    return Eigen::Matrix<double, 1, 1>(sigma_eps_ * (c_.F[0] + x_prev.dot(c_.H[0]) + 2.0 * c_.J[0] * eps));
  }

  /// Steady state plus N(0, (init_scale * max(|x_ss|, 1))^2) per coordinate.
  State sample_initial(RandomStream& rng) const {
    State x = c_.steady_state;
    for (int i = 0; i < 3; ++i) x[i] += init_scale_ * std::max(std::abs(x[i]), 1.0) * rng.normal();
    return x;
  }

  Observation sample_observation(const State& x, RandomStream& rng) const {
    return Observation(x[0] + sigma_nu_ * rng.normal());
  }

  /// Linearization about the steady state s: A = E + s'(G_i + G_i'), F + s'H,
  /// intercept d - s'G_i s (the eps^2 term is dropped). The x_0 prior is the
  /// model's initial distribution.
  LinearGaussianModel linearized() const {
    const State& s = c_.steady_state;
    Eigen::Matrix3d A = c_.E;
    Eigen::Vector3d f = c_.F;
    Eigen::Vector3d b = c_.d;
    for (int i = 0; i < 3; ++i) {
      A.row(i) += (s.transpose() * (c_.G[i] + c_.G[i].transpose()));
      f[i] += s.dot(c_.H[i]);
      b[i] -= s.dot(c_.G[i] * s);
    }
    LinearGaussianModel m;
    m.A = A;
    m.b = b;
    m.Q = sigma_eps_ * sigma_eps_ * f * f.transpose();
    m.C = Eigen::MatrixXd::Zero(1, 3);
    m.C(0, 0) = 1.0;
    m.c = Eigen::VectorXd::Zero(1);
    m.R = Eigen::MatrixXd::Constant(1, 1, sigma_nu_ * sigma_nu_);
    m.m0 = s;
    m.P0 = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      const double sd = init_scale_ * std::max(std::abs(s[i]), 1.0);
      m.P0(i, i) = sd * sd;
    }
    return m;
  }

 private:
  GrowthCoefficients c_;
  double sigma_eps_;
  double sigma_nu_;
  double init_scale_;
};

}  // namespace adpf
