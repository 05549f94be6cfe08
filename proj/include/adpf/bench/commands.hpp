#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adpf/bench/figures.hpp"
#include "adpf/bench/pmcmc_run.hpp"
#include "adpf/bench/study.hpp"
#include "adpf/mcmc/chain_io.hpp"
#include "adpf/models/simulate.hpp"

namespace adpf {

inline std::vector<std::string> latent_names(ModelId id) {
  switch (id) {
    case ModelId::qar1: return {"latent_x"};
    case ModelId::growth: return {"latent_c", "latent_k", "latent_a"};
    case ModelId::habit: return {"latent_s", "latent_b"};
  }
  return {};
}

/// Simulated data as CSV. Series models: t, y, latent states, standardized
/// disturbance and measurement noise. The habit model writes the quarterly
/// asset layout (date, dlog_pd, dlog_c, ...) with latent_b the accumulated
/// price-dividend gap that the filtering model leaves as noise.
inline void write_simulation(std::ostream& out, const ModelContext& ctx, const ParameterVector& theta, std::size_t T,
                             std::uint64_t seed) {
  RandomStream rng(seed, stream_id("dataset"));
  out << std::setprecision(17);
  with_model(ctx, theta, [&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    const auto path = simulate(m, T, rng);
    const auto sd = m.observation_sd();
    if constexpr (M::obs_dim == 2) {
      out << "date,dlog_pd,dlog_c,latent_s,latent_b,dist_nu,dist_eps,dist_eta\n";
      const IsoDate start{1950, 1, 1};
      double b = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        const auto& x = path.states[t];
        const auto& y = path.observations[t];
        const auto mu = m.observation_mean(x);
        b += y[0] - mu[0];
        out << start.plus_months(3 * static_cast<int>(t)).str() << ',' << y[0] << ',' << y[1] << ',' << x[0] << ','
            << b << ',' << path.disturbances[t][0] << ',' << (y[0] - mu[0]) / sd[0] << ',' << (y[1] - mu[1]) / sd[1]
            << '\n';
      }
    } else {
      out << "t,y";
      for (const auto& n : latent_names(ctx.id)) out << ',' << n;
      out << ",dist_u,dist_eps\n";
      for (std::size_t t = 0; t < T; ++t) {
        const auto& x = path.states[t];
        const double y = path.observations[t][0];
        out << t + 1 << ',' << y;
        for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << x[i];
        out << ',' << path.disturbances[t][0] << ',' << (y - m.observation_mean(x)[0]) / sd[0] << '\n';
      }
    }
  });
}

/// One filter run; with a trace, per-step increments, ESS and filtered state means.
inline LikelihoodEstimate run_single_filter(const ModelContext& ctx, const ParameterVector& theta,
                                            const ObservationData& data, FilterKind filter, std::size_t n,
                                            std::uint64_t seed, std::ostream* trace_out) {
  RandomStream rng(seed, stream_id(std::string(to_string(filter)) + "-" + std::to_string(n)));
  FilterOptions opt;
  opt.trace = trace_out != nullptr && filter != FilterKind::kalman;
  return with_model(ctx, theta, [&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    const auto ys = to_observations<typename M::Observation>(data);
    const auto res = run_filter(filter, m, ys, n, rng, opt);
    if (opt.trace) {
      *trace_out << "t,log_increment,ess";
      for (int i = 0; i < M::state_dim; ++i) *trace_out << ",filtered_x" << i;
      *trace_out << '\n' << std::setprecision(12);
      for (std::size_t t = 0; t < res.trace.snapshots.size(); ++t) {
        *trace_out << t + 1 << ',' << res.estimate.per_step_log_increments[t] << ',' << res.trace.ess[t];
        for (int i = 0; i < M::state_dim; ++i)
          *trace_out << ',' << res.trace.snapshots[t].expectation([i](const auto& x) { return x[i]; });
        *trace_out << '\n';
      }
    }
    return res.estimate;
  });
}

inline StudyResult run_study(const ModelContext& ctx, const ParameterVector& theta, const ObservationData& data,
                             const StudyConfig& cfg) {
  return with_model(ctx, theta, [&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    return run_filter_study(m, to_observations<typename M::Observation>(data), cfg);
  });
}

inline void write_bimodal_csv(std::ostream& out, const BimodalGrid& g) {
  out << "u,x,ell\n" << std::setprecision(12);
  for (std::size_t i = 0; i < g.u.size(); ++i) out << g.u[i] << ',' << g.x[i] << ',' << g.ell[i] << '\n';
}

inline void write_scatter_csv(std::ostream& out, const std::vector<ScatterPoint>& pts) {
  out << "beta_bar,phi\n" << std::setprecision(12);
  for (const auto& p : pts) out << p.beta_bar << ',' << p.phi << '\n';
}

/// Asset data with the ADPF filtered mean of s alongside.
inline void write_asset_overlay_csv(std::ostream& out, const ModelContext& ctx, const ParameterVector& theta,
                                    const ObservationData& data, std::size_t n, std::uint64_t seed) {
  if (!ctx.asset_data()) throw ConfigError("asset-data-overlay needs --model habit");
  RandomStream rng(seed, stream_id("overlay"));
  const HabitModel m(HabitParams::from(merge_parameters(ctx, theta)));
  const auto ys = to_observations<HabitModel::Observation>(data);
  FilterOptions opt;
  opt.trace = true;
  const auto res = run_filter(FilterKind::adpf, m, ys, n, rng, opt);
  const auto s = filtered_expectation(res.trace, [](const HabitModel::State& x) { return x[0]; });
  out << "date,dlog_pd,dlog_c,filtered_s\n" << std::setprecision(12);
  for (std::size_t t = 0; t < ys.size(); ++t) {
    out << (data.dates.empty() ? std::to_string(t + 1) : data.dates[t]) << ',' << ys[t][0] << ',' << ys[t][1] << ',';
    if (t < s.size()) out << s[t];
    else out << "nan";
    out << '\n';
  }
}

}  // namespace adpf
