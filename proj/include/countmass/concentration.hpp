#pragma once

// Computable deviation radii for empirical means of bounded statistics on
// mixing sequences, the odd/even blocking decomposition behind them, and a
// Monte Carlo harness that checks the stated failure budgets on simulated
// models.
//
// Bernstein-type radius (block variance route):
//   r = sqrt(4 tau v^2 log(1/delta) / n) + 4 B tau log(1/delta) / (3n),
// covering with probability >= 1 - 4 delta - eps once tau >= t_mix(eps/n),
// where v^2 = (1/tau^2) var(U_1 + ... + U_tau).
//
// Self-normalized radius (data-dependent route):
//   r = 82 sqrt(B log(2/delta) * sumU * tmix) / n,
// valid once sumU >= 36 B log(2/delta) tmix and n >= 24 tmix, covering with
// probability >= 1 - 10 delta - 2 eps for tmix = t_mix(eps/n). The constants
// are implemented exactly as stated, with no tuning.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "countmass/processes.hpp"

namespace countmass {

struct BlockDecomposition {
  std::vector<double> odd_sums;   // blocks 1, 3, 5, ... (one-based block index)
  std::vector<double> even_sums;  // blocks 2, 4, 6, ...
  std::uint64_t remainder = 0;    // trailing values not covered by a full block
};

// Tiles the prefix of length tau*floor(n/tau) with consecutive length-tau
// blocks and sums each; the tail is dropped and its length reported.
BlockDecomposition block_decompose(std::span<const double> values, std::uint64_t tau);

struct BernsteinInputs {
  std::uint64_t n = 0;
  std::uint64_t tau = 1;
  double v2 = 0.0;    // normalized block variance
  double B = 1.0;     // almost-sure bound on the statistic
  double delta = 0.1;
  double eps = 0.0;   // mixing slack entering the coverage budget only
};

double mixing_bernstein_radius(const BernsteinInputs& in);
inline double bernstein_budget(double delta, double eps) { return 4.0 * delta + eps; }

struct SelfNormInputs {
  std::uint64_t n = 0;
  double B = 1.0;
  double delta = 0.1;
  double eps = 0.0;
  std::uint64_t tmix = 1;  // mixing time at level eps/n
  double sum_u = 0.0;      // realized sum of the statistic
};

// Gate outcomes are data, not errors: sweeps legitimately cross the gates.
struct SelfNormResult {
  bool sum_gate_ok = false;
  bool n_gate_ok = false;
  double sum_gate_threshold = 0.0;  // 36 B log(2/delta) tmix
  std::optional<double> radius;     // set only when both gates hold

  bool ok() const noexcept { return sum_gate_ok && n_gate_ok; }
};

SelfNormResult self_normalized_radius(const SelfNormInputs& in);
inline double self_normalized_budget(double delta, double eps) { return 10.0 * delta + 2.0 * eps; }

enum class CoverageBound { bernstein, self_normalized };

struct CoverageSpec {
  CoverageBound bound = CoverageBound::bernstein;
  std::uint64_t n = 0;
  std::uint64_t tau = 1;  // radius window; also the block length for the v2 estimate
  double delta = 0.1;
  double eps = 0.0;
  std::uint64_t reps = 1;
  std::uint64_t seed = 0;
  std::uint32_t target_symbol = 0;   // statistic U_j = 1{X_j == target_symbol}
  std::optional<double> v2;          // analytic override; otherwise estimated
  unsigned threads = 0;              // 0 = hardware default
};

struct CoverageReport {
  CoverageBound bound = CoverageBound::bernstein;
  double nominal = 0.0;        // failure budget of the guarantee
  double observed = 0.0;       // fraction of replications exceeding the radius
  std::uint64_t reps = 0;
  std::uint64_t gate_failures = 0;  // self-normalized replications with a gate unmet
  double v2 = 0.0;                  // variance actually used (bernstein)
  std::uint64_t tmix = 0;           // mixing time used (self-normalized)
};

// Simulates replications of the model, measures |stationary mass of the
// target - empirical mean of the indicator| per replication, and reports the
// fraction exceeding the radius. For the self-normalized bound the guarantee
// covers the joint event "gates hold and deviation exceeds the radius", so
// gate-failing replications are tallied separately, never as failures.
CoverageReport empirical_coverage(const ProcessModel& model, const CoverageSpec& spec);

}  // namespace countmass
