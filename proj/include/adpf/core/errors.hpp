#pragma once

#include <stdexcept>
#include <string>

namespace adpf {

// Every entry of a log-weight vector is -inf: the swarm has degenerated.
struct AllWeightsZero : std::runtime_error {
  AllWeightsZero() : std::runtime_error("all particle weights are zero") {}
};

struct InvalidWeights : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CovarianceNotPD : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceMissing : std::logic_error {
  TraceMissing() : std::logic_error("filter trace was not captured") {}
};

struct ProposalUnsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainViolation : std::domain_error {
  using std::domain_error::domain_error;
};

struct DenominatorNonPositive : std::domain_error {
  using std::domain_error::domain_error;
};

struct BetaOutOfRange : std::domain_error {
  using std::domain_error::domain_error;
};

struct ZeroVariance : std::invalid_argument {
  ZeroVariance() : std::invalid_argument("chain component has zero variance") {}
};

struct InitInvalid : std::invalid_argument {
  InitInvalid() : std::invalid_argument("log target is -inf at the initial point") {}
};

struct OptimFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FixtureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace adpf
