#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "adpf/bench/commands.hpp"
#include "adpf/bench/data_io.hpp"
#include "adpf/bench/figures.hpp"
#include "adpf/bench/study.hpp"
#include "oracles.hpp"

using namespace adpf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("adpf_bench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ADPF_BENCH_EXE) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ObservationData parse_asset(const std::string& text) {
  std::istringstream in(text);
  return read_asset_csv(in);
}

ObservationData parse_series(const std::string& text) {
  std::istringstream in(text);
  return read_series_csv(in);
}

}  // namespace

TEST(Cli, SimulateIsDeterministic) {
  const auto d = scratch("sim");
  for (const char* m : {"qar1", "growth", "habit"}) {
    const std::string model = m;
    ASSERT_EQ(run_cli("simulate --model " + model + " --T 40 --seed 7 --out " + (d / (model + "_a.csv")).string()), 0);
    ASSERT_EQ(run_cli("simulate --model " + model + " --T 40 --seed 7 --out " + (d / (model + "_b.csv")).string()), 0);
    ASSERT_EQ(run_cli("simulate --model " + model + " --T 40 --seed 8 --out " + (d / (model + "_c.csv")).string()), 0);
    const auto a = slurp(d / (model + "_a.csv"));
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(d / (model + "_b.csv"))) << model;
    EXPECT_NE(a, slurp(d / (model + "_c.csv"))) << model;
  }
}

TEST(Cli, EmptySimulationIsHeaderOnly) {
  const auto d = scratch("empty");
  ASSERT_EQ(run_cli("simulate --model qar1 --T 0 --out " + (d / "e.csv").string()), 0);
  const auto text = slurp(d / "e.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text.rfind("t,y,", 0), 0u);
}

TEST(Cli, StudyIsDeterministic) {
  const auto d = scratch("study");
  const std::string common = "filter-study --model qar1 --T 20 --seed 3 --grid sir:40,adpf:10 --reps 6 "
                             "--ref-particles 500 --threads 3 --out-dir ";
  ASSERT_EQ(run_cli(common + (d / "a").string()), 0);
  ASSERT_EQ(run_cli(common + (d / "b").string()), 0);
  const auto a = slurp(d / "a" / "study.csv");
  EXPECT_EQ(a, slurp(d / "b" / "study.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), study_csv_header());
  EXPECT_TRUE(fs::exists(d / "a" / "study.json"));
}

TEST(Cli, ExitCodes) {
  const auto d = scratch("codes");
  EXPECT_EQ(run_cli("simulate --model nope"), 2);
  EXPECT_EQ(run_cli("simulate --model qar1 --param nope=1 --out " + (d / "x.csv").string()), 2);
  EXPECT_EQ(run_cli("filter --model qar1 --data " + (d / "missing.csv").string()), 2);
  EXPECT_EQ(run_cli("figure-data --scene nope --out-dir " + d.string()), 2);
  EXPECT_EQ(run_cli("filter-study --model qar1 --T 5 --reps 1 --out-dir " + d.string()), 2);

  // an observation so far out that the reference swarm dies
  {
    std::ofstream f(d / "far.csv");
    f << "t,y\n1,0.1\n2,1e200\n";
  }
  EXPECT_EQ(run_cli("filter-study --model qar1 --data " + (d / "far.csv").string() +
                    " --grid sir:10 --reps 2 --ref-particles 50 --out-dir " + (d / "far").string()),
            3);

  ASSERT_EQ(run_cli("simulate --model qar1 --T 30 --out " + (d / "q.csv").string()), 0);
  EXPECT_EQ(run_cli("pmcmc --model qar1 --data " + (d / "q.csv").string() + " --init 1.5,1,1 --draws 10 --out-dir " +
                    (d / "pm").string()),
            4);
  EXPECT_EQ(run_cli("pmcmc --model qar1 --data " + (d / "q.csv").string() +
                    " --draws 20 --burn-in 5 --loglik-reps 3 --particles 20 --out-dir " + (d / "pm").string()),
            0);
  EXPECT_TRUE(fs::exists(d / "pm" / "chain.csv"));
  EXPECT_TRUE(fs::exists(d / "pm" / "diagnostics.csv"));
}

TEST(Study, RowMatchingReferenceHasZeroBias) {
  const Qar1Params p{0.6, 1.0, 1.0, 0.0};
  RandomStream rng(1, stream_id("dataset"));
  const auto ys = simulate(Qar1Model(p), 25, rng).observations;
  StudyConfig cfg;
  cfg.grid = {{FilterKind::sir, 300}};
  cfg.reps = 8;
  cfg.ref_particles = 300;
  cfg.ref_reps = 8;
  const auto res = run_filter_study(Qar1Model(p), ys, cfg);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].bias, 0.0);
  EXPECT_EQ(res.rows[0].logliks, res.reference_runs);
  EXPECT_NEAR(res.rows[0].k, 1.0, 1e-12);
}

TEST(Study, SummaryStatistics) {
  Replications r;
  r.logliks = {-3, -1, -2, -4, -5};
  r.tally = 5 * 10 * 4;
  const auto row = summarize(FilterKind::sir, 10, r, -2.5, 4);
  EXPECT_DOUBLE_EQ(row.median_loglik, -3);
  EXPECT_DOUBLE_EQ(row.mean_loglik, -3);
  EXPECT_DOUBLE_EQ(row.variance, 2.5);
  EXPECT_DOUBLE_EQ(row.bias, -0.5);
  EXPECT_DOUBLE_EQ(row.k, 1.0);
  EXPECT_LT(row.variance_ci_low, 2.5);
  EXPECT_GT(row.variance_ci_high, 2.5);
  // chi-square(4) 2.5% and 97.5% quantiles: 0.4844, 11.1433
  EXPECT_NEAR(row.variance_ci_low, 4 * 2.5 / 11.1433, 1e-3);
  EXPECT_NEAR(row.variance_ci_high, 4 * 2.5 / 0.4844, 1e-2);
}

TEST(Study, RejectsDegenerateConfigurations) {
  const std::vector<Qar1Model::Observation> ys(3, Qar1Model::Observation(0.0));
  StudyConfig cfg;
  cfg.reps = 1;
  cfg.grid = {{FilterKind::sir, 10}};
  EXPECT_THROW(run_filter_study(Qar1Model(), ys, cfg), ConfigError);
  cfg.reps = 2;
  cfg.grid.clear();
  EXPECT_THROW(run_filter_study(Qar1Model(), ys, cfg), ConfigError);
}

TEST(Simulate, LinearSeriesHasStationaryVariance) {
  const auto ctx = make_context(ModelId::qar1);
  ParameterVector theta;
  theta.add("phi", 0.6);
  theta.add("sigma_u", 1.0);
  theta.add("sigma_eps", 0.5);
  theta.add("delta", 0.0);
  std::stringstream buf;
  write_simulation(buf, ctx, theta, 100'000, 4);
  const auto d = read_series_csv(buf);
  std::vector<double> y;
  for (const auto& r : d.rows) y.push_back(r[0]);
  ASSERT_EQ(y.size(), 100'000u);
  const double want = 1.0 / (1 - 0.36) + 0.25;
  EXPECT_NEAR(oracle::var(y) / want, 1.0, 0.05);
}

TEST(Simulate, AssetOutputParsesBack) {
  const auto ctx = make_context(ModelId::habit);
  std::stringstream buf;
  write_simulation(buf, ctx, {}, 12, 2);
  const auto d = read_asset_csv(buf);
  ASSERT_EQ(d.rows.size(), 12u);
  EXPECT_EQ(d.dates.front(), "1950-01-01");
  EXPECT_EQ(d.dates.back(), "1952-10-01");
}

TEST(DataIo, AssetRejections) {
  EXPECT_NO_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-01-01,0.1,0.01\n1950-04-01,0.2,0.02\n"));
  EXPECT_THROW(parse_asset(""), DataError);
  EXPECT_THROW(parse_asset("date,dlog_c,dlog_pd\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c,extra\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-01-01,0.1,0.01\n1950-02-01,0.2,0.02\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-01-01,,0.01\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-01-01,nan,0.01\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-1-1,0.1,0.01\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-01-01,0.1\n"), DataError);
  EXPECT_THROW(parse_asset("date,dlog_pd,dlog_c\n1950-01-01,0.1x,0.2\n"), DataError);
}

TEST(DataIo, SeriesRejections) {
  const auto ok = parse_series("t,y,latent_x\n1,0.5,0\n2,-0.25,1\n");
  ASSERT_EQ(ok.rows.size(), 2u);
  EXPECT_EQ(ok.rows[1][0], -0.25);
  EXPECT_THROW(parse_series("y,t\n"), DataError);
  EXPECT_THROW(parse_series("t,y\n1,abc\n"), DataError);
  EXPECT_THROW(parse_series("t,y\n1,inf\n"), DataError);
}

TEST(Figures, BimodalGeometry) {
  const auto g = bimodal_grid();
  // x(u) = u + u^2 / 2 is minimized at u = -1
  const auto xmin = std::min_element(g.x.begin(), g.x.end());
  EXPECT_NEAR(*xmin, -0.5, 1e-12);
  EXPECT_NEAR(g.u[static_cast<std::size_t>(xmin - g.x.begin())], -1.0, 1e-9);

  // modes of -(0.5 - x(u))^2 / (2 * 0.04) - u^2 / 2: stationary points solve
  // (0.5 - x(u))(1 + u) / 0.04 = u
  auto grad = [](double u) { return (0.5 - (u + 0.5 * u * u)) * (1 + u) / 0.04 - u; };
  auto root = [&](double a, double b) {
    boost::uintmax_t it = 100;
    const auto r = boost::math::tools::toms748_solve(grad, a, b, boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
  };
  const double m1 = root(-3.0, -1.5), m2 = root(0.0, 1.0);
  const auto peaks = local_maxima(g.ell);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_NEAR(g.u[peaks[0]], m1, 1e-3);
  EXPECT_NEAR(g.u[peaks[1]], m2, 1e-3);
}

TEST(Figures, ScatterOfConstantChain) {
  ChainRecord c;
  c.names = HabitParams{}.to_vector().names();
  Eigen::VectorXd x(7);
  const HabitParams h;
  x << h.gamma, h.g, h.r_f, h.phi, h.sigma_nu, h.sigma_eta, h.sigma_eps;
  for (int i = 0; i < 50; ++i) {
    c.draws.push_back(x);
    c.log_posteriors.push_back(0);
    c.accepted.push_back(0);
  }
  RandomStream rng(1);
  const auto pts = chain_scatter(c, 20, rng, 10);
  ASSERT_EQ(pts.size(), 20u);
  for (const auto& p : pts) {
    EXPECT_DOUBLE_EQ(p.beta_bar, rf_to_beta(h));
    EXPECT_DOUBLE_EQ(p.phi, h.phi);
  }
  // more requested than available: sampled with replacement
  EXPECT_EQ(chain_scatter(c, 100, rng, 10).size(), 100u);
  EXPECT_TRUE(chain_scatter(c, 5, rng, 60).empty());
}
