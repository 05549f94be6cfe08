#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adpf/bench/registry.hpp"
#include "adpf/bench/study.hpp"
#include "adpf/mcmc/diagnostics.hpp"
#include "adpf/mcmc/kalman_init.hpp"
#include "adpf/mcmc/priors.hpp"
#include "adpf/mcmc/rwmh.hpp"

namespace adpf {

struct PmcmcConfig {
  FilterKind filter = FilterKind::adpf;
  std::size_t particles = 50;
  std::size_t draws = 1000;
  std::uint64_t seed = 1;
  std::size_t burn_in = 1000;
  std::size_t loglik_reps = 75;
  std::optional<Eigen::VectorXd> init;
  AdaptConfig adapt;
  double initial_sd_fraction = 0.1;  // pre-adaptation proposal sd, as a fraction of prior sd
  AdapterConfig adapter;
};

struct ParameterSummary {
  std::string name;
  double mean = 0, sd = 0, inefficiency = 0, computing_time = 0;
};

struct PmcmcOutput {
  ChainRecord chain;
  std::vector<ParameterSummary> summary;
  double acceptance = 0;
  double k = 0;  // transition calls per particle per observation
  double loglik_variance_at_init = 0;
  std::size_t T = 0;
};

/// Log-likelihood of `data` at the free parameters `theta`: observations are
/// converted once per observation dimension.
class LikelihoodPlugin {
 public:
  LikelihoodPlugin(const ModelContext& ctx, const ObservationData& data, const PriorSpec& prior)
      : ctx_(ctx), prior_(prior) {
    if (ctx.asset_data()) {
      ys2_ = to_observations<Eigen::Vector2d>(data);
    } else {
      ys1_ = to_observations<Eigen::Matrix<double, 1, 1>>(data);
    }
  }

  std::size_t T() const { return ctx_.asset_data() ? ys2_.size() : ys1_.size(); }

  /// Filter estimate; throws when the model cannot be built at theta.
  LikelihoodEstimate estimate(const Eigen::VectorXd& theta, FilterKind f, std::size_t n, RandomStream& rng,
                              const AdapterConfig& acfg = {}) const {
    return with_model(ctx_, prior_.apply(theta), [&](const auto& m) {
      using M = std::decay_t<decltype(m)>;
      if constexpr (M::obs_dim == 1) {
        return run_filter(f, m, ys1_, n, rng, {}, acfg).estimate;
      } else {
        return run_filter(f, m, ys2_, n, rng, {}, acfg).estimate;
      }
    });
  }

  /// Log-likelihood of the linear-Gaussian reduction.
  double kalman_loglik(const Eigen::VectorXd& theta) const {
    RandomStream unused(0);
    return estimate(theta, FilterKind::kalman, 1, unused).total_log_likelihood;
  }

  const PriorSpec& prior() const { return prior_; }
  const ModelContext& context() const { return ctx_; }

 private:
  const ModelContext& ctx_;
  PriorSpec prior_;
  std::vector<Eigen::Matrix<double, 1, 1>> ys1_;
  std::vector<Eigen::Vector2d> ys2_;
};

inline bool is_model_rejection(const std::exception& e) {
  return dynamic_cast<const std::domain_error*>(&e) != nullptr ||
         dynamic_cast<const std::invalid_argument*>(&e) != nullptr ||
         dynamic_cast<const CovarianceNotPD*>(&e) != nullptr;
}

/// Starting point: explicit, else the Kalman-based posterior mode when a
/// linear reduction exists, else the prior mean.
inline Eigen::VectorXd pmcmc_initial_point(const LikelihoodPlugin& lik, const PmcmcConfig& cfg) {
  if (cfg.init) return *cfg.init;
  if (lik.context().id == ModelId::habit) return lik.prior().means();
  auto kll = [&](const Eigen::VectorXd& th) {
    try {
      return lik.kalman_loglik(th);
    } catch (const std::exception& e) {
      if (is_model_rejection(e)) return kNegInf;
      throw;
    }
  };
  return kalman_ml_init(kll, lik.prior(), lik.T());
}

inline PmcmcOutput run_pmcmc(const ModelContext& ctx, const ObservationData& data, const PriorSpec& prior,
                             const PmcmcConfig& cfg) {
  LikelihoodPlugin lik(ctx, data, prior);
  PmcmcOutput out;
  out.T = lik.T();
  std::uint64_t evals = 0;
  auto target = [&](const Eigen::VectorXd& th) {
    TargetValue tv;
    const double lp = prior.log_prior(th);
    if (!(lp > kNegInf)) return tv;
    RandomStream rng(cfg.seed, stream_id("chain-filter", evals++));
    try {
      const auto est = lik.estimate(th, cfg.filter, cfg.particles, rng, cfg.adapter);
      tv.tally = est.eval_tally;
      tv.ran_filter = true;
      tv.log_posterior = est.total_log_likelihood + lp;
    } catch (const std::exception& e) {
      if (!is_model_rejection(e)) throw;
    }
    return tv;
  };

  const Eigen::VectorXd init = pmcmc_initial_point(lik, cfg);
  AdaptConfig ac = cfg.adapt;
  if (ac.initial_sd.size() != init.size()) ac.initial_sd = cfg.initial_sd_fraction * prior.sds();
  RandomStream chain_rng(cfg.seed, stream_id("chain"));
  out.chain = adaptive_rwmh(target, init, cfg.draws, ac, chain_rng, prior.names());

  const std::size_t burn = std::min(cfg.burn_in, out.chain.size());
  out.acceptance = out.chain.acceptance_rate(burn);
  const double runs = static_cast<double>(out.chain.filter_runs);
  out.k = runs > 0 && out.T > 0 ? evaluations_per_particle(static_cast<double>(out.chain.eval_tally_total),
                                                           static_cast<double>(cfg.particles),
                                                           static_cast<double>(out.T), runs)
                                : 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    ParameterSummary s;
    s.name = prior[j].name();
    const auto comp = out.chain.component(j, burn);
    if (!comp.empty()) {
      s.mean = sample_mean(comp);
      s.sd = comp.size() > 1 ? std::sqrt(sample_variance(comp)) : 0.0;
      try {
        s.inefficiency = inefficiency(comp);
      } catch (const std::exception&) {
        s.inefficiency = std::nan("");
      }
      s.computing_time = computing_time(out.k, static_cast<double>(cfg.particles), s.inefficiency);
    }
    out.summary.push_back(s);
  }

  if (cfg.loglik_reps >= 2) {
    std::vector<double> ll(cfg.loglik_reps);
    for (std::size_t r = 0; r < cfg.loglik_reps; ++r) {
      RandomStream rng(cfg.seed, stream_id("init-loglik", r));
      ll[r] = lik.estimate(init, cfg.filter, cfg.particles, rng, cfg.adapter).total_log_likelihood;
    }
    out.loglik_variance_at_init = sample_variance(ll);
  }
  return out;
}

inline nlohmann::json pmcmc_sidecar(const ModelContext& ctx, const PriorSpec& prior, const PmcmcConfig& cfg,
                                    const PmcmcOutput& out) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["particles"] = cfg.particles;
  j["model"] = to_string(ctx.id);
  j["filter"] = to_string(cfg.filter);
  j["prior"] = prior.to_json();
  j["draws"] = cfg.draws;
  j["burn_in"] = cfg.burn_in;
  j["observations"] = out.T;
  j["eval_tally"] = out.chain.eval_tally_total;
  j["filter_runs"] = out.chain.filter_runs;
  j["k"] = out.k;
  j["acceptance"] = out.acceptance;
  j["loglik_variance_at_init"] = out.loglik_variance_at_init;
  std::vector<double> init(out.chain.init.data(), out.chain.init.data() + out.chain.init.size());
  j["init"] = init;
  nlohmann::json fixed = nlohmann::json::object();
  for (const auto& e : ctx.defaults.entries()) {
    bool free = false;
    for (const auto& n : prior.names()) free = free || n == e.name;
    if (!free) fixed[e.name] = e.value;
  }
  j["fixed_parameters"] = fixed;
  return j;
}

inline void write_pmcmc_diagnostics(std::ostream& out, const PmcmcOutput& o, std::size_t particles) {
  out << "parameter,mean,sd,inefficiency,computing_time,acceptance,k,particles,loglik_variance_at_init\n"
      << std::setprecision(10);
  for (const auto& s : o.summary) {
    out << s.name << ',' << s.mean << ',' << s.sd << ',' << s.inefficiency << ',' << s.computing_time << ','
        << o.acceptance << ',' << o.k << ',' << particles << ',' << o.loglik_variance_at_init << '\n';
  }
}

}  // namespace adpf
