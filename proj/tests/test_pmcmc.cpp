#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "adpf/filters/kalman.hpp"
#include "adpf/mcmc/chain_io.hpp"
#include "adpf/mcmc/diagnostics.hpp"
#include "adpf/mcmc/kalman_init.hpp"
#include "adpf/mcmc/priors.hpp"
#include "adpf/mcmc/rwmh.hpp"
#include "adpf/models/qar1.hpp"
#include "adpf/models/simulate.hpp"
#include "oracles.hpp"

using namespace adpf;

namespace {

std::vector<double> ar1_chain(double rho, std::size_t K, std::uint64_t seed) {
  RandomStream rng(seed, stream_id("ar1-chain"));
  std::vector<double> x(K);
  double v = rng.normal() / std::sqrt(1 - rho * rho);
  for (auto& xi : x) {
    v = rho * v + rng.normal();
    xi = v;
  }
  return x;
}

PriorSpec qar1_prior() {
  std::ifstream in(std::string(ADPF_DATA_DIR) + "/priors/qar1.json");
  return PriorSpec::from_json(nlohmann::json::parse(in));
}

}  // namespace

TEST(Priors, BetaShapesFromMoments) {
  const PriorComponent c("rho", PriorFamily::beta, 0.8, 0.1);
  EXPECT_NEAR(c.shape1(), 12.0, 1e-12);
  EXPECT_NEAR(c.shape2(), 3.0, 1e-12);
  const auto [a, b] = oracle::beta_shapes(0.8, 0.01);
  EXPECT_NEAR(c.shape1(), a, 1e-12);
  EXPECT_NEAR(c.shape2(), b, 1e-12);
  EXPECT_EQ(c.logpdf(1.2), kNegInf);
  EXPECT_EQ(c.logpdf(0.0), kNegInf);
  // Beta(12, 3) at 0.75 by hand
  const double want = std::lgamma(15.0) - std::lgamma(12.0) - std::lgamma(3.0) + 11 * std::log(0.75) + 2 * std::log(0.25);
  EXPECT_NEAR(c.logpdf(0.75), want, 1e-12);
}

TEST(Priors, GammaShapeRate) {
  const PriorComponent c("sigma", PriorFamily::gamma, 0.01, 0.01);
  EXPECT_NEAR(c.shape1(), 1.0, 1e-12);
  EXPECT_NEAR(c.shape2(), 100.0, 1e-9);
  // exponential with rate 100
  EXPECT_NEAR(c.logpdf(0.02), std::log(100.0) - 2.0, 1e-12);
  EXPECT_EQ(c.logpdf(-0.1), kNegInf);
}

TEST(Priors, InfeasibleMomentsThrow) {
  EXPECT_THROW(PriorComponent("x", PriorFamily::beta, 0.5, 0.6), std::invalid_argument);
  EXPECT_THROW(PriorComponent("x", PriorFamily::gamma, -1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(PriorComponent("x", PriorFamily::normal, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(prior_family_from_string("cauchy"), std::invalid_argument);
}

TEST(Priors, DensitiesIntegrateToOne) {
  const PriorComponent b("b", PriorFamily::beta, 0.333, 0.015);
  EXPECT_NEAR(oracle::simpson([&](double x) { return std::exp(b.logpdf(x)); }, 1e-9, 1 - 1e-9, 20000), 1.0, 1e-6);
  const PriorComponent g("g", PriorFamily::gamma, 2.0, 0.5);
  EXPECT_NEAR(oracle::simpson([&](double x) { return std::exp(g.logpdf(x)); }, 1e-9, 10.0, 20000), 1.0, 1e-6);
}

class PriorSampling : public ::testing::TestWithParam<PriorFamily> {};

TEST_P(PriorSampling, MomentsMatchDeclaration) {
  const double m = GetParam() == PriorFamily::beta ? 0.3 : 1.5;
  const PriorComponent c("x", GetParam(), m, 0.1);
  RandomStream rng(4, stream_id("prior-sampling"));
  const int n = 200'000;
  std::vector<double> x(n);
  for (auto& v : x) v = c.sample(rng);
  const double sd = std::sqrt(oracle::var(x));
  EXPECT_NEAR(oracle::mean(x), m, 3 * sd / std::sqrt(n));
  // sample variance se for near-normal shapes: var * sqrt(2/n), padded for skew
  EXPECT_NEAR(oracle::var(x), 0.01, 3 * 0.01 * std::sqrt(3.0 / n));
}

INSTANTIATE_TEST_SUITE_P(Families, PriorSampling,
                         ::testing::Values(PriorFamily::beta, PriorFamily::gamma, PriorFamily::normal));

TEST(Priors, JsonRoundTrip) {
  const auto p = qar1_prior();
  const auto q = PriorSpec::from_json(p.to_json());
  ASSERT_EQ(p.size(), q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p[i].name(), q[i].name());
    EXPECT_EQ(p[i].family(), q[i].family());
    EXPECT_EQ(p[i].mean(), q[i].mean());
  }
  EXPECT_THROW(PriorSpec::from_json(nlohmann::json::parse(R"({"parameters": []})")), std::invalid_argument);
}

TEST(Rwmh, SamplesNormalTarget) {
  auto target = [](const Eigen::VectorXd& x) { return -0.5 * std::pow((x[0] - 1.0) / 2.0, 2); };
  RandomStream rng(9, stream_id("chain"));
  AdaptConfig cfg;
  const auto rec = adaptive_rwmh(target, Eigen::VectorXd::Constant(1, 0.0), 50'000, cfg, rng);
  const auto x = rec.component(0, 1000);
  const double IF = inefficiency(x);
  const double se = std::sqrt(4.0 * IF / x.size());
  EXPECT_NEAR(oracle::mean(x), 1.0, 4 * se);
  EXPECT_NEAR(oracle::var(x), 4.0, 0.2);
  EXPECT_GT(rec.acceptance_rate(), 0.2);
  EXPECT_LT(rec.acceptance_rate(), 0.7);
}

TEST(Rwmh, AllRejectWhenProposalsAreInfeasible) {
  // support is a single point: every move lands outside it
  auto target = [](const Eigen::VectorXd& x) { return x[0] == 0.5 ? 0.0 : kNegInf; };
  RandomStream rng(1, stream_id("chain"));
  const auto rec = adaptive_rwmh(target, Eigen::VectorXd::Constant(1, 0.5), 500, AdaptConfig{}, rng);
  EXPECT_EQ(rec.acceptance_rate(), 0.0);
  for (const auto& d : rec.draws) EXPECT_EQ(d[0], 0.5);
}

TEST(Rwmh, InvalidInitThrows) {
  auto target = [](const Eigen::VectorXd&) { return kNegInf; };
  RandomStream rng(1, stream_id("chain"));
  EXPECT_THROW(adaptive_rwmh(target, Eigen::VectorXd::Zero(2), 10, AdaptConfig{}, rng), InitInvalid);
}

TEST(Rwmh, IncumbentIsNeverReestimated) {
  // noisy target: the stored value must be carried, so each draw's recorded
  // log posterior equals the value returned when that point was proposed
  std::map<double, double> seen;
  RandomStream noise(2, stream_id("noise"));
  int calls = 0;
  auto target = [&](const Eigen::VectorXd& x) {
    ++calls;
    const double v = -0.5 * x[0] * x[0] + noise.normal();
    seen[x[0]] = v;
    return TargetValue{v, 7, true};
  };
  RandomStream rng(3, stream_id("chain"));
  const auto rec = adaptive_rwmh(target, Eigen::VectorXd::Zero(1), 2000, AdaptConfig{}, rng);
  EXPECT_EQ(calls, 2001);
  EXPECT_EQ(rec.eval_tally_total, 7u * 2001u);
  EXPECT_EQ(rec.filter_runs, 2001u);
  for (std::size_t i = 0; i < rec.size(); ++i) EXPECT_EQ(rec.log_posteriors[i], seen.at(rec.draws[i][0]));
}

TEST(Rwmh, DeterministicUnderSeed) {
  auto target = [](const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); };
  RandomStream r1(5, stream_id("chain")), r2(5, stream_id("chain"));
  const auto a = adaptive_rwmh(target, Eigen::VectorXd::Zero(3), 1000, AdaptConfig{}, r1);
  const auto b = adaptive_rwmh(target, Eigen::VectorXd::Zero(3), 1000, AdaptConfig{}, r2);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.draws[i], b.draws[i]);
}

TEST(Diagnostics, IidChainHasUnitInefficiency) {
  RandomStream rng(6, stream_id("iid"));
  std::vector<double> x(100'000);
  for (auto& v : x) v = rng.normal();
  const double IF = inefficiency(x);
  EXPECT_GT(IF, 0.8);
  EXPECT_LT(IF, 1.3);
}

TEST(Diagnostics, Ar1ChainInefficiency) {
  // (1 + rho) / (1 - rho) = 19 at rho = 0.9
  const double IF = inefficiency(ar1_chain(0.9, 100'000, 12));
  EXPECT_NEAR(IF / 19.0, 1.0, 0.15);
}

TEST(Diagnostics, ConstantChainThrows) {
  EXPECT_THROW(inefficiency(std::vector<double>(100, 2.0)), ZeroVariance);
  EXPECT_THROW(inefficiency(std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST(Diagnostics, TruncationIncludesFirstSmallLag) {
  const std::vector<double> rho{0.5, 0.3, 0.001, 0.4, 0.4};
  // K = 10^4: threshold 0.02, lag 3 is the first below it
  EXPECT_NEAR(inefficiency_from_autocorrelations(rho, 10'000), 1 + 2 * (0.5 + 0.3 + 0.001), 1e-15);
  EXPECT_NEAR(inefficiency_from_autocorrelations(rho, 10'000, 1), 2.0, 1e-15);
}

TEST(Diagnostics, AutocorrelationsByHand) {
  const std::vector<double> x{1, 2, 3, 4};
  // centred: -1.5 -0.5 0.5 1.5, c0 = 5
  const auto r = autocorrelations(x, 3);
  EXPECT_NEAR(r[0], (0.75 - 0.25 + 0.75) / 5, 1e-15);
  EXPECT_NEAR(r[1], (-0.75 - 0.75) / 5, 1e-15);
  EXPECT_NEAR(r[2], -2.25 / 5, 1e-15);
}

TEST(Diagnostics, ComputingTime) {
  EXPECT_DOUBLE_EQ(computing_time(16, 500, 100), 8e5);
  // SIR moves every particle once per observation
  EXPECT_DOUBLE_EQ(evaluations_per_particle(100.0 * 50 * 3, 100, 50, 3), 1.0);
}

TEST(KalmanInit, RecoversPersistence) {
  const Qar1Params truth{0.7, 1.0, 0.5, 0.0};
  RandomStream rng(21, stream_id("dataset"));
  const auto path = simulate(Qar1Model(truth), 500, rng);
  std::vector<Eigen::VectorXd> ys(path.observations.begin(), path.observations.end());
  const auto prior = qar1_prior();
  auto ll = [&](const Eigen::VectorXd& th) {
    return kalman_filter(qar1_linear_gaussian({th[0], th[1], th[2], 0.0}), ys).log_likelihood;
  };
  const auto th = kalman_ml_init(ll, prior, ys.size());
  EXPECT_NEAR(th[0], 0.7, 0.1);
  EXPECT_GT(prior.log_prior(th), kNegInf);
}

TEST(KalmanInit, NoDataGivesPriorMean) {
  const auto prior = qar1_prior();
  auto ll = [](const Eigen::VectorXd&) -> double { throw std::logic_error("not called"); };
  EXPECT_EQ(kalman_ml_init(ll, prior, 0), prior.means());
}

TEST(KalmanInit, FailsWhenObjectiveIsNowhereFinite) {
  const auto prior = qar1_prior();
  auto ll = [](const Eigen::VectorXd&) { return kNegInf; };
  EXPECT_THROW(kalman_ml_init(ll, prior, 10), OptimFailed);
}

TEST(ChainIo, RoundTrip) {
  ChainRecord rec;
  rec.names = {"phi", "sigma_u"};
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd x(2);
    x << 0.1 * i + 1.0 / 3.0, std::exp(i * 0.7);
    rec.draws.push_back(x);
    rec.log_posteriors.push_back(-10.0 - i / 7.0);
    rec.accepted.push_back(i % 2);
  }
  const auto path = (std::filesystem::temp_directory_path() / "adpf_chain_roundtrip.csv").string();
  write_chain_csv(path, rec);
  const auto back = read_chain_csv(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.names, rec.names);
  ASSERT_EQ(back.size(), rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    EXPECT_EQ(back.draws[i], rec.draws[i]);
    EXPECT_EQ(back.log_posteriors[i], rec.log_posteriors[i]);
    EXPECT_EQ(back.accepted[i], rec.accepted[i]);
  }
}

TEST(ChainIo, RejectsForeignFiles) {
  const auto path = (std::filesystem::temp_directory_path() / "adpf_not_a_chain.csv").string();
  {
    std::ofstream out(path);
    out << "a,b,c\n1,2,3\n";
  }
  EXPECT_THROW(read_chain_csv(path), std::runtime_error);
  std::remove(path.c_str());
}
