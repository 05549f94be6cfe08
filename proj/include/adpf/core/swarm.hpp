#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "adpf/core/weights.hpp"

namespace adpf {

/// Particles with their log weights and normalized weights at one time step.
template <class State>
struct ParticleSwarm {
  std::vector<State> states;
  std::vector<double> log_weights;
  std::vector<double> weights;
  std::size_t time_index = 0;

  ParticleSwarm() = default;
  ParticleSwarm(std::vector<State> xs, std::vector<double> logw, std::size_t t = 0)
      : states(std::move(xs)), log_weights(std::move(logw)), time_index(t) {
    if (states.size() != log_weights.size() || states.empty())
      throw std::invalid_argument("swarm needs equal, non-zero numbers of states and weights");
    weights.resize(states.size());
    normalize_log_weights_into(log_weights, weights);
  }

  std::size_t size() const { return states.size(); }

  template <class F>
  double expectation(F&& m) const {
    double s = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) s += weights[i] * m(states[i]);
    return s;
  }
};

}  // namespace adpf
