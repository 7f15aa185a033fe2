#pragma once

// Ground-truth count-mass computation, the oracle natural distribution, Monte
// Carlo TV-risk evaluation of the estimators against simulated models, and
// closed-form reference curves. Every universal constant left free by the
// theory is fixed to 1, so the curves give constant-free shapes: rate
// comparisons are meaningful, absolute levels are not.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "countmass/estimators.hpp"
#include "countmass/processes.hpp"
#include "countmass/seqcore.hpp"

namespace countmass {

// Full symbol law over the model alphabet; index = symbol id.
struct GroundTruth {
  std::vector<double> pi;
};

// True count mass of the realized sequence: entry z collects the stationary
// mass of every symbol observed exactly z times; entry 0 collects the mass of
// the symbols never observed.
CountMassVector true_count_mass(const GroundTruth& truth, const CountTable& counts);

// Natural distribution with the true class masses: every symbol observed z
// times gets M_z / phi_z of the true count mass, unseen symbols share entry 0.
NaturalDistribution oracle_natural(const GroundTruth& truth, const CountTable& counts);

// TV between the full symbol law and a natural distribution whose working
// alphabet matches the truth. The aggregate lump, attached to no symbol,
// counts as pure extra mass.
double tv_against_truth(const GroundTruth& truth, const CountTable& counts,
                        const NaturalDistribution& q);

// Constant-free shape of the hybrid risk guarantee: sqrt(tau log n) / n^(1/6).
double hybrid_risk_rate(std::uint64_t n, std::uint64_t tau);

// Constant-free plug-in error bound at count zeta:
//   sqrt(zeta * tau0) * phi_zeta * sqrt(log(n/delta)) / n,
// with tau0 the mixing time at level eps/n^2.
double plugin_error_bound(std::uint64_t zeta, std::uint64_t tau0, std::uint64_t phi_zeta,
                          std::uint64_t n, double delta);

// Count threshold above which the plug-in bound's guarantee applies:
//   max(36 tau0 log(22n/delta), 1 + sqrt((4+8 tau0) log(11n/delta)) + (4 tau0/3) log(11n/delta)).
double plugin_bound_count_threshold(std::uint64_t tau0, std::uint64_t n, double delta);

// Constant-free windowed-estimator error bound at count zeta. em[u] holds the
// expected count mass at zeta+u for u = 0..4 tau - 2:
//   sqrt(tau/n) * (sqrt(em[0]) + sqrt(zeta log(2 tau) em[0])
//                  + sqrt(sum_{u>=1} ((zeta+u)/u) em[u])) + (zeta+1) tau / n.
double wingit_error_bound(std::uint64_t zeta, std::uint64_t tau, std::uint64_t n,
                          std::span<const double> em);

enum class EstimatorKind { hybrid, wingit, plugin };

struct RiskSpec {
  EstimatorKind estimator = EstimatorKind::hybrid;
  std::uint64_t n = 0;
  std::uint64_t tau = 1;
  std::uint64_t zeta_bar = 0;  // used by the hybrid only
  std::uint64_t reps = 1;
  std::uint64_t seed = 0;
  bool per_zeta = false;       // collect per-count mean absolute errors
  bool per_zeta_full = false;  // report all counts, not just z <= 3 zeta_bar
  unsigned threads = 0;
};

// Everything one replication produced, handed to the optional inspector.
// The inspector may run concurrently across replications.
struct ReplicationView {
  std::uint64_t replication;
  const TokenSequence& seq;
  const CountTable& counts;
  const CountMassVector& estimate;      // normalized estimate
  const CountMassVector& unnormalized;  // pre-normalization entries (hybrid)
  const CountMassVector& truth;
  double nu;
  bool fallback;
  double tv;
  double l1;
};

struct RiskReport {
  std::uint64_t n = 0;
  std::uint64_t tau = 1;
  std::uint64_t zeta_bar = 0;
  std::uint64_t reps = 0;
  double tv_mean = 0.0;
  double tv_se = 0.0;
  double l1_mean = 0.0;
  double theory_rate = 0.0;            // constant-free shape
  std::vector<double> per_zeta_mae;    // empty unless requested
};

RiskReport tv_risk_monte_carlo(const ProcessModel& model, const RiskSpec& spec,
                               const std::function<void(const ReplicationView&)>& inspect = {});

}  // namespace countmass
