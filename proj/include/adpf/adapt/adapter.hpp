#pragma once

#include <span>
#include <vector>

#include "adpf/adapt/laplace.hpp"
#include "adpf/adapt/mixture.hpp"
#include "adpf/core/model.hpp"

namespace adpf {

struct AdapterConfig {
  LMConfig lm;
  double window = 3.0;
  CurvatureMethod curvature = CurvatureMethod::gauss_newton;
};

/// The ADPF second-stage proposal: one mode search per resampled particle,
/// Laplace curvatures, and the windowed equal-weight mixture over all modes.
template <GaussianObservationModel M>
class LaplaceMixtureAdapter {
 public:
  static constexpr int du = M::disturbance_dim;
  static constexpr int dy = M::obs_dim;

  explicit LaplaceMixtureAdapter(AdapterConfig cfg = {}) : cfg_(cfg) {}

  void prepare(std::span<const typename M::State> xs, const typename M::Observation& y,
               CountedTransition<M>& h, RandomStream& rng) {
    modes_.resize(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      modes_[k] = find_mode_lm(xs[k], y, h, cfg_.lm, rng, cfg_.curvature);
      if (!modes_[k].u_mode.allFinite() || !modes_[k].curvature.allFinite())
        throw ProposalUnsupported("mode search produced a non-finite proposal");
    }
    try {
      mix_ = build_mixture<M>(std::span<const ModeEstimate<du, dy>>(modes_), xs, y, h.model(), cfg_.window);
    } catch (const CovarianceNotPD& e) {
      throw ProposalUnsupported(e.what());
    }
  }

  ProposalDraw<typename M::Disturbance> sample(std::size_t k, RandomStream& rng) const {
    return mix_.sample(k, rng);
  }

  const std::vector<ModeEstimate<du, dy>>& modes() const { return modes_; }
  const MixtureProposal<du>& mixture() const { return mix_; }
  const AdapterConfig& config() const { return cfg_; }

 private:
  AdapterConfig cfg_;
  std::vector<ModeEstimate<du, dy>> modes_;
  MixtureProposal<du> mix_;
};

}  // namespace adpf
