#pragma once

#include <vector>

#include "adpf/core/model.hpp"

namespace adpf {

template <class M>
struct SimulatedPath {
  typename M::State initial;
  std::vector<typename M::State> states;  // x_1 .. x_T
  std::vector<typename M::Disturbance> disturbances;
  std::vector<typename M::Observation> observations;
};

/// x_0 ~ p(x_0), then x_t = h(x_{t-1}, u_t), y_t ~ p(y | x_t).
template <StateSpaceModel M>
SimulatedPath<M> simulate(const M& model, std::size_t T, RandomStream& rng) {
  SimulatedPath<M> path;
  path.initial = model.sample_initial(rng);
  typename M::State x = path.initial;
  for (std::size_t t = 0; t < T; ++t) {
    typename M::Disturbance u;
    fill_standard_normal(u, rng);
    x = model.transition(x, u);
    path.disturbances.push_back(u);
    path.states.push_back(x);
    path.observations.push_back(model.sample_observation(x, rng));
  }
  return path;
}

}  // namespace adpf
