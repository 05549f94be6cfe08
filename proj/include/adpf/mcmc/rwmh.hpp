#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/errors.hpp"
#include "adpf/core/random.hpp"
#include "adpf/core/weights.hpp"

namespace adpf {

/// One evaluation of a (possibly noisy) log target and the transition calls it cost.
struct TargetValue {
  double log_posterior = kNegInf;
  std::uint64_t tally = 0;
  bool ran_filter = false;
};

struct ChainRecord {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> draws;
  std::vector<double> log_posteriors;
  std::vector<char> accepted;
  std::uint64_t eval_tally_total = 0;
  std::uint64_t filter_runs = 0;
  Eigen::VectorXd init;
  double init_log_posterior = kNegInf;

  std::size_t size() const { return draws.size(); }

  double acceptance_rate(std::size_t burn_in = 0) const {
    if (accepted.size() <= burn_in) return 0.0;
    std::size_t a = 0;
    for (std::size_t i = burn_in; i < accepted.size(); ++i) a += accepted[i] != 0;
    return static_cast<double>(a) / static_cast<double>(accepted.size() - burn_in);
  }

  std::vector<double> component(std::size_t j, std::size_t burn_in = 0) const {
    std::vector<double> out;
    for (std::size_t i = burn_in; i < draws.size(); ++i) out.push_back(draws[i][static_cast<Eigen::Index>(j)]);
    return out;
  }
};

struct AdaptConfig {
  std::size_t adaptation_start = 100;
  Eigen::VectorXd initial_sd;  // diagonal proposal before adaptation
  double scale = -1.0;         // <= 0 means 2.38^2 / dim
  double jitter = 1e-10;
};

/// Running mean and covariance (Welford).
class RunningMoments {
 public:
  explicit RunningMoments(Eigen::Index d) : mean_(Eigen::VectorXd::Zero(d)), m2_(Eigen::MatrixXd::Zero(d, d)) {}

  void push(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd d0 = x - mean_;
    mean_ += d0 / static_cast<double>(n_);
    m2_ += d0 * (x - mean_).transpose();
  }

  std::size_t count() const { return n_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::MatrixXd covariance() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(m2_.rows(), m2_.cols());
    const Eigen::MatrixXd c = m2_ / static_cast<double>(n_ - 1);
    return 0.5 * (c + c.transpose());
  }

 private:
  std::size_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

/// Adaptive random-walk Metropolis-Hastings with a pseudo-marginal target:
/// each point's log target is evaluated once and stored, so the incumbent is
/// never re-estimated. Before `adaptation_start` draws the proposal is
/// diagonal; afterwards it is scale * (Cov(past draws) + jitter I).
/// `log_target` returns TargetValue or double.
template <class F>
ChainRecord adaptive_rwmh(F&& log_target, const Eigen::VectorXd& init, std::size_t n_draws, const AdaptConfig& cfg,
                          RandomStream& rng, std::vector<std::string> names = {}) {
  const Eigen::Index d = init.size();
  auto eval = [&](const Eigen::VectorXd& th) {
    if constexpr (std::is_convertible_v<decltype(log_target(th)), double>) {
      return TargetValue{static_cast<double>(log_target(th)), 0, false};
    } else {
      return static_cast<TargetValue>(log_target(th));
    }
  };

  ChainRecord rec;
  rec.names = std::move(names);
  rec.init = init;
  TargetValue cur = eval(init);
  rec.eval_tally_total += cur.tally;
  rec.filter_runs += cur.ran_filter;
  rec.init_log_posterior = cur.log_posterior;
  if (!(cur.log_posterior > kNegInf)) throw InitInvalid();

  const double scale = cfg.scale > 0.0 ? cfg.scale : 2.38 * 2.38 / static_cast<double>(d);
  Eigen::VectorXd sd0 = cfg.initial_sd.size() == d ? cfg.initial_sd : Eigen::VectorXd::Constant(d, 0.1);
  Eigen::MatrixXd chol = sd0.asDiagonal();
  RunningMoments mom(d);
  mom.push(init);
  Eigen::VectorXd x = init;
  rec.draws.reserve(n_draws);
  rec.log_posteriors.reserve(n_draws);
  rec.accepted.reserve(n_draws);

  for (std::size_t i = 0; i < n_draws; ++i) {
    if (i >= cfg.adaptation_start) {
      Eigen::MatrixXd c = scale * mom.covariance();
      c.diagonal().array() += cfg.jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(c);
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }
    Eigen::VectorXd z(d);
    for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
    const Eigen::VectorXd prop = x + chol * z;
    const TargetValue tv = eval(prop);
    rec.eval_tally_total += tv.tally;
    rec.filter_runs += tv.ran_filter;
    const double log_u = std::log(rng.uniform_open());
    const bool acc = tv.log_posterior > kNegInf && log_u < tv.log_posterior - cur.log_posterior;
    if (acc) {
      x = prop;
      cur = tv;
    }
    rec.draws.push_back(x);
    rec.log_posteriors.push_back(cur.log_posterior);
    rec.accepted.push_back(acc);
    mom.push(x);
  }
  return rec;
}

}  // namespace adpf
