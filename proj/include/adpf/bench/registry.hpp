#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adpf/adapt/adapter.hpp"
#include "adpf/bench/data_io.hpp"
#include "adpf/filters/adpf.hpp"
#include "adpf/filters/cupf1.hpp"
#include "adpf/filters/kalman.hpp"
#include "adpf/filters/sir.hpp"
#include "adpf/models/growth.hpp"
#include "adpf/models/habit.hpp"
#include "adpf/models/qar1.hpp"

namespace adpf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelId { qar1, growth, habit };
enum class FilterKind { sir, adpf, cupf1, kalman };

inline ModelId parse_model(const std::string& s) {
  if (s == "qar1") return ModelId::qar1;
  if (s == "growth") return ModelId::growth;
  if (s == "habit") return ModelId::habit;
  throw ConfigError("unknown model '" + s + "'");
}

inline const char* to_string(ModelId m) {
  switch (m) {
    case ModelId::qar1: return "qar1";
    case ModelId::growth: return "growth";
    case ModelId::habit: return "habit";
  }
  return "?";
}

inline FilterKind parse_filter(const std::string& s) {
  if (s == "sir") return FilterKind::sir;
  if (s == "adpf") return FilterKind::adpf;
  if (s == "cupf1") return FilterKind::cupf1;
  if (s == "kalman") return FilterKind::kalman;
  throw ConfigError("unknown filter '" + s + "'");
}

inline const char* to_string(FilterKind f) {
  switch (f) {
    case FilterKind::sir: return "sir";
    case FilterKind::adpf: return "adpf";
    case FilterKind::cupf1: return "cupf1";
    case FilterKind::kalman: return "kalman";
  }
  return "?";
}

/// What is needed to instantiate a model at any parameter point.
struct ModelContext {
  ModelId id = ModelId::qar1;
  ParameterVector defaults;
  std::optional<GrowthFixture> fixture;
  GrowthProvider provider;
  bool asset_data() const { return id == ModelId::habit; }
};

enum class GrowthProviderKind { fixture, tangent };

inline ModelContext make_context(ModelId id, const std::string& fixture_path = "",
                                 GrowthProviderKind provider = GrowthProviderKind::tangent) {
  ModelContext ctx;
  ctx.id = id;
  switch (id) {
    case ModelId::qar1: ctx.defaults = Qar1Params{}.to_vector(); break;
    case ModelId::habit: ctx.defaults = HabitParams{}.to_vector(); break;
    case ModelId::growth: {
      std::string path = fixture_path;
#ifdef ADPF_DATA_DIR
      if (path.empty()) path = default_growth_fixture_path();
#endif
      if (path.empty()) throw ConfigError("growth model needs --fixture");
      ctx.fixture = load_growth_fixture(path);
      ctx.defaults = ctx.fixture->params.to_vector();
      ctx.provider = provider == GrowthProviderKind::tangent && !ctx.fixture->tangent.empty()
                         ? tangent_provider(*ctx.fixture)
                         : fixture_provider(*ctx.fixture);
      break;
    }
  }
  return ctx;
}

/// Overrides defaults with `theta` entries (unknown names are a config error).
inline ParameterVector merge_parameters(const ModelContext& ctx, const ParameterVector& theta) {
  ParameterVector p = ctx.defaults;
  for (const auto& e : theta.entries()) {
    if (!p.has(e.name)) throw ConfigError("model " + std::string(to_string(ctx.id)) + " has no parameter " + e.name);
    p.set(e.name, e.value);
  }
  return p;
}

/// Builds the concrete model for `theta` and calls f(model). Model
/// construction failures (support, explosive expansions, provider refusal)
/// propagate as exceptions.
template <class F>
decltype(auto) with_model(const ModelContext& ctx, const ParameterVector& theta, F&& f) {
  const ParameterVector p = merge_parameters(ctx, theta);
  if (!p.in_support()) throw DomainViolation("parameters outside support");
  switch (ctx.id) {
    case ModelId::qar1: return f(Qar1Model(Qar1Params::from(p)));
    case ModelId::growth: {
      const GrowthParams gp = GrowthParams::from(p, ctx.fixture->params);
      return f(GrowthModel(ctx.provider(gp), gp.sigma_eps, gp.sigma_nu2));
    }
    case ModelId::habit: return f(HabitModel(HabitParams::from(p)));
  }
  throw ConfigError("unknown model");
}

inline LinearGaussianModel linear_gaussian_of(const Qar1Model& m) { return qar1_linear_gaussian(m.params()); }
inline LinearGaussianModel linear_gaussian_of(const GrowthModel& m) { return m.linearized(); }
inline LinearGaussianModel linear_gaussian_of(const HabitModel&) {
  throw ConfigError("no linear-Gaussian reduction is registered for the habit model");
}

template <class M>
FilterResult<typename M::State> run_filter(FilterKind kind, const M& model,
                                           const std::vector<typename M::Observation>& ys, std::size_t n,
                                           RandomStream& rng, const FilterOptions& opt = {},
                                           const AdapterConfig& acfg = {}) {
  switch (kind) {
    case FilterKind::sir: return sir_filter(model, ys, n, rng, opt);
    case FilterKind::adpf: {
      LaplaceMixtureAdapter<M> adapter(acfg);
      return adpf_filter(model, adapter, ys, n, rng, opt);
    }
    case FilterKind::cupf1: return cupf1_filter(model, ys, n, rng, UnscentedConfig{}, opt);
    case FilterKind::kalman: {
      const auto lg = linear_gaussian_of(model);
      std::vector<Eigen::VectorXd> yv(ys.begin(), ys.end());
      const auto kr = kalman_filter(lg, yv);
      FilterResult<typename M::State> r;
      r.estimate.per_step_log_increments = kr.increments;
      r.estimate.total_log_likelihood = kr.log_likelihood;
      r.estimate.particle_count = n;
      return r;
    }
  }
  throw ConfigError("unknown filter");
}

}  // namespace adpf
