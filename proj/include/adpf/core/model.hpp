#pragma once

#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "adpf/core/random.hpp"
#include "adpf/core/weights.hpp"

namespace adpf {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

/// Independent Gaussian coordinates, sum of log densities.
template <class V>
double diag_normal_logpdf(const V& x, const V& mean, const V& sd) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += normal_logpdf(x[i], mean[i], sd[i]);
  return std::isfinite(s) ? s : kNegInf;
}

/// log phi(u; 0, I): the disturbance density, standard normal by construction.
template <class V>
double log_disturbance_density(const V& u) {
  return -0.5 * u.squaredNorm() - kLogSqrt2Pi * static_cast<double>(u.size());
}

template <class V>
void fill_standard_normal(V& u, RandomStream& rng) {
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
}

// The model contract. A model object binds its parameter values; transition is
// deterministic in (x, u) and u is standard normal.
template <class M>
concept StateSpaceModel = requires(const M& m, const typename M::State& x,
                                   const typename M::Disturbance& u,
                                   const typename M::Observation& y, RandomStream& rng) {
  typename M::State;
  typename M::Disturbance;
  typename M::Observation;
  { M::state_dim } -> std::convertible_to<int>;
  { M::disturbance_dim } -> std::convertible_to<int>;
  { M::obs_dim } -> std::convertible_to<int>;
  { m.transition(x, u) } -> std::convertible_to<typename M::State>;
  { m.log_measurement_density(y, x) } -> std::convertible_to<double>;
  { m.sample_initial(rng) } -> std::convertible_to<typename M::State>;
  { m.sample_observation(x, rng) } -> std::convertible_to<typename M::Observation>;
};

// Adds the moment-matched first-stage density g(y_{t+1} | x_t).
template <class M>
concept FirstStageModel = StateSpaceModel<M> && requires(const M& m, const typename M::State& x,
                                                         const typename M::Observation& y) {
  { m.first_stage_log_density(y, x) } -> std::convertible_to<double>;
};

// Gaussian measurement y = mean(x) + sd * e. Needed by the mode search and the
// unscented comparator.
template <class M>
concept GaussianObservationModel = FirstStageModel<M> && requires(const M& m, const typename M::State& x) {
  { m.observation_mean(x) } -> std::convertible_to<typename M::Observation>;
  { m.observation_sd() } -> std::convertible_to<typename M::Observation>;
};

// Optional analytic d mean(h(x_prev, u)) / du.
template <class M>
concept HasObservationJacobian = GaussianObservationModel<M> &&
    requires(const M& m, const typename M::State& x, const typename M::Disturbance& u) {
  { m.observation_jacobian(x, u) }
      -> std::convertible_to<Eigen::Matrix<double, M::obs_dim, M::disturbance_dim>>;
};

/// A disturbance drawn from a proposal, with the proposal's log density there.
template <class D>
struct ProposalDraw {
  D u;
  double log_density;
};

/// Counts calls of the transition function. Every filter and optimizer goes
/// through this, so the count is the CT tally.
template <StateSpaceModel M>
class CountedTransition {
 public:
  using State = typename M::State;
  using Disturbance = typename M::Disturbance;

  explicit CountedTransition(const M& model) : model_(&model) {}

  State operator()(const State& x, const Disturbance& u) {
    ++count_;
    return model_->transition(x, u);
  }

  /// For analytic derivative routines whose cost is one evaluation.
  void charge(std::uint64_t n) { count_ += n; }

  const M& model() const { return *model_; }
  std::uint64_t count() const { return count_; }
  void reset() { count_ = 0; }

 private:
  const M* model_;
  std::uint64_t count_ = 0;
};

/// Log-density of the measurement at the state reached from x_prev through u:
/// the mode-search objective l(u) = log p(y | h(x_prev, u)) + log phi(u).
template <StateSpaceModel M>
double objective_log_density(const typename M::Disturbance& u, const typename M::State& x_prev,
                             const typename M::Observation& y, CountedTransition<M>& h) {
  const double lp = h.model().log_measurement_density(y, h(x_prev, u));
  return lp + log_disturbance_density(u);
}

template <StateSpaceModel M>
double objective_log_density(const typename M::Disturbance& u, const typename M::State& x_prev,
                             const typename M::Observation& y, const M& model) {
  CountedTransition<M> h(model);
  return objective_log_density(u, x_prev, y, h);
}

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work is assigned by
/// index, so results stored by index do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& body, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  pool.reserve(nt);
  for (unsigned t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace adpf
