#pragma once

#include <cstdint>
#include <vector>

#include "adpf/core/errors.hpp"
#include "adpf/core/resample.hpp"
#include "adpf/core/swarm.hpp"
#include "adpf/core/weights.hpp"

namespace adpf {

enum class FilterStatus { ok, all_weights_zero, proposal_unsupported };

inline const char* to_string(FilterStatus s) {
  switch (s) {
    case FilterStatus::ok: return "ok";
    case FilterStatus::all_weights_zero: return "all_weights_zero";
    case FilterStatus::proposal_unsupported: return "proposal_unsupported";
  }
  return "?";
}

struct LikelihoodEstimate {
  std::vector<double> per_step_log_increments;
  double total_log_likelihood = 0.0;
  std::uint64_t eval_tally = 0;
  std::size_t particle_count = 0;
  FilterStatus status = FilterStatus::ok;

  bool degenerate() const { return status != FilterStatus::ok; }
  std::size_t steps() const { return per_step_log_increments.size(); }
};

template <class State>
struct FilterTrace {
  bool enabled = false;
  std::vector<ParticleSwarm<State>> snapshots;  // filtered swarm after each step
  std::vector<double> ess;
  std::vector<double> first_stage_entropy;  // empty for SIR
};

template <class State>
struct FilterResult {
  LikelihoodEstimate estimate;
  FilterTrace<State> trace;

  double loglik() const { return estimate.total_log_likelihood; }
};

struct FilterOptions {
  bool trace = false;
  ResamplingScheme resampling = ResamplingScheme::multinomial;
};

/// sum_k m(x_t^k) pi_t^k for every traced step.
template <class State, class F>
std::vector<double> filtered_expectation(const FilterTrace<State>& trace, F&& m) {
  if (!trace.enabled) throw TraceMissing();
  std::vector<double> out;
  out.reserve(trace.snapshots.size());
  for (const auto& s : trace.snapshots) out.push_back(s.expectation(m));
  return out;
}

namespace detail {

// Adds one increment and returns false once the run has degenerated.
inline bool push_increment(LikelihoodEstimate& est, double inc, FilterStatus fail) {
  est.per_step_log_increments.push_back(inc);
  if (!(inc > kNegInf)) {
    est.status = fail;
    est.total_log_likelihood = kNegInf;
    return false;
  }
  est.total_log_likelihood += inc;
  return true;
}

}  // namespace detail

}  // namespace adpf
