#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adpf/core/model.hpp"
#include "adpf/core/parameters.hpp"

namespace adpf {

enum class PriorFamily { beta, gamma, normal, truncated_normal };

inline PriorFamily prior_family_from_string(const std::string& s) {
  if (s == "beta") return PriorFamily::beta;
  if (s == "gamma") return PriorFamily::gamma;
  if (s == "normal") return PriorFamily::normal;
  if (s == "truncated_normal") return PriorFamily::truncated_normal;
  throw std::invalid_argument("unknown prior family " + s);
}

inline const char* to_string(PriorFamily f) {
  switch (f) {
    case PriorFamily::beta: return "beta";
    case PriorFamily::gamma: return "gamma";
    case PriorFamily::normal: return "normal";
    case PriorFamily::truncated_normal: return "truncated_normal";
  }
  return "?";
}

/// One independent prior, declared by mean and standard deviation.
/// truncated_normal is a normal restricted to (0, inf) whose normalizing
/// constant is left out (constant in theta).
class PriorComponent {
 public:
  PriorComponent(std::string name, PriorFamily family, double mean, double sd)
      : name_(std::move(name)), family_(family), mean_(mean), sd_(sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("prior sd must be positive for " + name_);
    const double v = sd * sd;
    switch (family) {
      case PriorFamily::beta: {
        if (!(mean > 0.0 && mean < 1.0) || !(v < mean * (1.0 - mean)))
          throw std::invalid_argument("beta prior moments infeasible for " + name_);
        const double nu = mean * (1.0 - mean) / v - 1.0;
        a_ = mean * nu;
        b_ = (1.0 - mean) * nu;
        log_norm_ = std::lgamma(a_ + b_) - std::lgamma(a_) - std::lgamma(b_);
        break;
      }
      case PriorFamily::gamma:
        if (!(mean > 0.0)) throw std::invalid_argument("gamma prior mean must be positive for " + name_);
        a_ = mean * mean / v;  // shape
        b_ = mean / v;         // rate
        log_norm_ = a_ * std::log(b_) - std::lgamma(a_);
        break;
      case PriorFamily::normal:
      case PriorFamily::truncated_normal:
        a_ = mean;
        b_ = sd;
        log_norm_ = -std::log(sd) - kLogSqrt2Pi;
        break;
    }
  }

  const std::string& name() const { return name_; }
  PriorFamily family() const { return family_; }
  double mean() const { return mean_; }
  double sd() const { return sd_; }
  // beta: (a, b); gamma: (shape, rate); normal: (mean, sd)
  double shape1() const { return a_; }
  double shape2() const { return b_; }

  Support support() const {
    switch (family_) {
      case PriorFamily::beta: return Support::unit_interval();
      case PriorFamily::gamma:
      case PriorFamily::truncated_normal: return Support::positive();
      case PriorFamily::normal: return Support::real();
    }
    return Support::real();
  }

  double logpdf(double x) const {
    if (!support().contains(x)) return kNegInf;
    switch (family_) {
      case PriorFamily::beta: return log_norm_ + (a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log1p(-x);
      case PriorFamily::gamma: return log_norm_ + (a_ - 1.0) * std::log(x) - b_ * x;
      case PriorFamily::normal:
      case PriorFamily::truncated_normal: {
        const double z = (x - a_) / b_;
        return log_norm_ - 0.5 * z * z;
      }
    }
    return kNegInf;
  }

  double sample(RandomStream& rng) const {
    switch (family_) {
      case PriorFamily::beta: {
        const double x = std::gamma_distribution<double>(a_, 1.0)(rng);
        const double y = std::gamma_distribution<double>(b_, 1.0)(rng);
        return x / (x + y);
      }
      case PriorFamily::gamma: return std::gamma_distribution<double>(a_, 1.0 / b_)(rng);
      case PriorFamily::normal: return a_ + b_ * rng.normal();
      case PriorFamily::truncated_normal: {
        double x;
        do {
          x = a_ + b_ * rng.normal();
        } while (!(x > 0.0));
        return x;
      }
    }
    return 0.0;
  }

 private:
  std::string name_;
  PriorFamily family_;
  double mean_, sd_;
  double a_ = 0.0, b_ = 0.0, log_norm_ = 0.0;
};

/// Independent priors over the free parameters, in declaration order.
class PriorSpec {
 public:
  PriorSpec() = default;
  explicit PriorSpec(std::vector<PriorComponent> c) : comps_(std::move(c)) {}

  void add(PriorComponent c) { comps_.push_back(std::move(c)); }
  std::size_t size() const { return comps_.size(); }
  const std::vector<PriorComponent>& components() const { return comps_; }
  const PriorComponent& operator[](std::size_t i) const { return comps_[i]; }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& c : comps_) n.push_back(c.name());
    return n;
  }

  double log_prior(const Eigen::VectorXd& theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      s += comps_[i].logpdf(theta[static_cast<Eigen::Index>(i)]);
      if (s == kNegInf) return kNegInf;
    }
    return s;
  }

  Eigen::VectorXd means() const {
    Eigen::VectorXd m(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) m[static_cast<Eigen::Index>(i)] = comps_[i].mean();
    return m;
  }

  Eigen::VectorXd sds() const {
    Eigen::VectorXd m(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) m[static_cast<Eigen::Index>(i)] = comps_[i].sd();
    return m;
  }

  Eigen::VectorXd sample(RandomStream& rng) const {
    Eigen::VectorXd x(comps_.size());
    for (std::size_t i = 0; i < comps_.size(); ++i) x[static_cast<Eigen::Index>(i)] = comps_[i].sample(rng);
    return x;
  }

  /// Writes the free values into a copy of `base`, adding entries it lacks.
  ParameterVector apply(const Eigen::VectorXd& theta, ParameterVector base = {}) const {
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const double v = theta[static_cast<Eigen::Index>(i)];
      if (base.has(comps_[i].name())) {
        base.set(comps_[i].name(), v);
      } else {
        base.add(comps_[i].name(), v, comps_[i].support());
      }
    }
    return base;
  }

  /// {"parameters": [{"name": ..., "family": ..., "mean": ..., "sd": ...}, ...]}
  static PriorSpec from_json(const nlohmann::json& j) {
    PriorSpec p;
    for (const auto& e : j.at("parameters")) {
      p.add(PriorComponent(e.at("name").get<std::string>(), prior_family_from_string(e.at("family").get<std::string>()),
                           e.at("mean").get<double>(), e.at("sd").get<double>()));
    }
    if (p.size() == 0) throw std::invalid_argument("prior lists no parameters");
    return p;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : comps_)
      arr.push_back({{"name", c.name()}, {"family", to_string(c.family())}, {"mean", c.mean()}, {"sd", c.sd()}});
    return {{"parameters", arr}};
  }

 private:
  std::vector<PriorComponent> comps_;
};

}  // namespace adpf
