#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "adpf/bench/registry.hpp"

namespace adpf {

struct DegenerateReference : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Type-7 (linear interpolation) sample quantile.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return std::nan("");
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

struct VarianceInterval {
  double low, high;
};

/// 95% chi-square interval for a variance from `n` normal draws.
inline VarianceInterval variance_interval(double var, std::size_t n, double level = 0.95) {
  const double df = static_cast<double>(n - 1);
  boost::math::chi_squared chi(df);
  const double a = 0.5 * (1.0 - level);
  return {df * var / boost::math::quantile(chi, 1.0 - a), df * var / boost::math::quantile(chi, a)};
}

/// Stream for replication `rep` of `filter` at `n` particles. The reference
/// runs use the same naming, so a study row equal to the reference
/// configuration reproduces it exactly.
inline RandomStream replication_stream(std::uint64_t seed, FilterKind filter, std::size_t n, std::size_t rep) {
  return RandomStream(seed, stream_id(std::string(to_string(filter)) + "-" + std::to_string(n), rep));
}

struct Replications {
  std::vector<double> logliks;
  std::uint64_t tally = 0;
  std::size_t degenerate = 0;
};

template <class M>
Replications replicate(FilterKind filter, const M& model, const std::vector<typename M::Observation>& ys,
                       std::size_t n, std::size_t reps, std::uint64_t seed, unsigned threads = 0,
                       const AdapterConfig& acfg = {}) {
  Replications r;
  r.logliks.resize(reps);
  std::vector<std::uint64_t> tallies(reps);
  parallel_for(
      reps,
      [&](std::size_t i) {
        RandomStream rng = replication_stream(seed, filter, n, i);
        const auto res = run_filter(filter, model, ys, n, rng, {}, acfg);
        r.logliks[i] = res.estimate.total_log_likelihood;
        tallies[i] = res.estimate.eval_tally;
      },
      threads);
  for (std::size_t i = 0; i < reps; ++i) {
    r.tally += tallies[i];
    r.degenerate += !(r.logliks[i] > kNegInf);
  }
  return r;
}

struct StudyRow {
  std::string filter;
  std::size_t particles = 0, reps = 0;
  double median_loglik = 0, iqr = 0, std_loglik = 0, variance = 0, variance_ci_low = 0, variance_ci_high = 0;
  double bias = 0, reference_loglik = 0, mean_loglik = 0, k = 0;
  std::vector<double> logliks;
};

struct StudyConfig {
  std::vector<std::pair<FilterKind, std::size_t>> grid;
  std::size_t reps = 1000;
  std::size_t ref_particles = 1000000;
  std::size_t ref_reps = 1;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  AdapterConfig adapter;
};

struct StudyResult {
  double reference_loglik = 0.0;
  std::vector<double> reference_runs;
  std::vector<StudyRow> rows;
};

inline StudyRow summarize(FilterKind filter, std::size_t n, const Replications& r, double reference, std::size_t T) {
  StudyRow row;
  row.filter = to_string(filter);
  row.particles = n;
  row.reps = r.logliks.size();
  row.logliks = r.logliks;
  row.median_loglik = quantile(r.logliks, 0.5);
  row.iqr = quantile(r.logliks, 0.75) - quantile(r.logliks, 0.25);
  row.mean_loglik = sample_mean(r.logliks);
  row.variance = sample_variance(r.logliks);
  row.std_loglik = std::sqrt(row.variance);
  if (row.reps >= 2 && std::isfinite(row.variance)) {
    const auto ci = variance_interval(row.variance, row.reps);
    row.variance_ci_low = ci.low;
    row.variance_ci_high = ci.high;
  } else {
    row.variance_ci_low = row.variance_ci_high = std::nan("");
  }
  row.reference_loglik = reference;
  row.bias = row.mean_loglik - reference;
  const double denom = static_cast<double>(n) * static_cast<double>(T) * static_cast<double>(row.reps);
  row.k = denom > 0 ? static_cast<double>(r.tally) / denom : 0.0;
  return row;
}

/// Replicates each (filter, N) on fixed data; bias is measured against the
/// mean of `ref_reps` SIR runs at `ref_particles`.
template <class M>
StudyResult run_filter_study(const M& model, const std::vector<typename M::Observation>& ys, const StudyConfig& cfg) {
  if (cfg.reps < 2) throw ConfigError("a study needs at least 2 replications");
  if (cfg.grid.empty()) throw ConfigError("empty particle grid");
  StudyResult res;
  if (cfg.ref_reps > 0) {
    const auto ref = replicate(FilterKind::sir, model, ys, cfg.ref_particles, cfg.ref_reps, cfg.seed, cfg.threads);
    if (ref.degenerate > 0) throw DegenerateReference("reference filter degenerated");
    res.reference_runs = ref.logliks;
    res.reference_loglik = sample_mean(ref.logliks);
  } else {
    res.reference_loglik = std::nan("");
  }
  for (const auto& [f, n] : cfg.grid) {
    const auto r = replicate(f, model, ys, n, cfg.reps, cfg.seed, cfg.threads, cfg.adapter);
    res.rows.push_back(summarize(f, n, r, res.reference_loglik, ys.size()));
  }
  return res;
}

inline const char* study_csv_header() {
  return "filter,particles,reps,median_loglik,iqr,std_loglik,variance,variance_ci_low,variance_ci_high,bias,"
         "reference_loglik,mean_loglik,k";
}

inline void write_study_csv(std::ostream& out, const StudyResult& r) {
  out << study_csv_header() << '\n' << std::setprecision(10);
  for (const auto& row : r.rows) {
    out << row.filter << ',' << row.particles << ',' << row.reps << ',' << row.median_loglik << ',' << row.iqr << ','
        << row.std_loglik << ',' << row.variance << ',' << row.variance_ci_low << ',' << row.variance_ci_high << ','
        << row.bias << ',' << row.reference_loglik << ',' << row.mean_loglik << ',' << row.k << '\n';
  }
}

}  // namespace adpf
