#include "countmass/concentration.hpp"

#include <cmath>
#include <stdexcept>

#include "countmass/parallel.hpp"

namespace countmass {

BlockDecomposition block_decompose(std::span<const double> values, std::uint64_t tau) {
  if (tau < 1) throw std::invalid_argument("block length must be at least 1");
  if (values.size() < tau) throw std::invalid_argument("input shorter than one block");
  const std::uint64_t blocks = values.size() / tau;
  BlockDecomposition out;
  out.remainder = values.size() - blocks * tau;
  out.odd_sums.reserve((blocks + 1) / 2);
  out.even_sums.reserve(blocks / 2);
  for (std::uint64_t k = 0; k < blocks; ++k) {
    double sum = 0.0;
    for (std::uint64_t j = k * tau; j < (k + 1) * tau; ++j) sum += values[j];
    (k % 2 == 0 ? out.odd_sums : out.even_sums).push_back(sum);  // k=0 is block 1
  }
  return out;
}

double mixing_bernstein_radius(const BernsteinInputs& in) {
  if (in.n < 1) throw std::invalid_argument("sequence length must be at least 1");
  if (in.tau < 1) throw std::invalid_argument("block length must be at least 1");
  if (!(in.v2 >= 0.0)) throw std::invalid_argument("block variance must be nonnegative");
  if (!(in.B > 0.0)) throw std::invalid_argument("bound on the statistic must be positive");
  if (!(in.delta > 0.0) || in.delta > 1.0)
    throw std::invalid_argument("failure budget must lie in (0,1]");
  if (!(in.eps >= 0.0)) throw std::invalid_argument("mixing slack must be nonnegative");
  const double log_term = std::log(1.0 / in.delta);
  const double n = static_cast<double>(in.n);
  const double tau = static_cast<double>(in.tau);
  return std::sqrt(4.0 * tau * in.v2 * log_term / n) + 4.0 * in.B * tau * log_term / (3.0 * n);
}

SelfNormResult self_normalized_radius(const SelfNormInputs& in) {
  if (in.n < 1) throw std::invalid_argument("sequence length must be at least 1");
  if (!(in.B > 0.0)) throw std::invalid_argument("bound on the statistic must be positive");
  if (!(in.delta > 0.0) || !(in.delta < 1.0))
    throw std::invalid_argument("failure budget must lie in (0,1)");
  if (!(in.eps >= 0.0)) throw std::invalid_argument("mixing slack must be nonnegative");
  if (in.tmix < 1) throw std::invalid_argument("mixing time must be at least 1");
  if (!(in.sum_u >= 0.0)) throw std::invalid_argument("statistic sum must be nonnegative");

  const double log_term = std::log(2.0 / in.delta);
  const double tmix = static_cast<double>(in.tmix);
  SelfNormResult out;
  out.sum_gate_threshold = 36.0 * in.B * log_term * tmix;
  out.sum_gate_ok = in.sum_u >= out.sum_gate_threshold;
  out.n_gate_ok = static_cast<double>(in.n) >= 24.0 * tmix;
  if (out.ok())
    out.radius = 82.0 * std::sqrt(in.B * log_term * in.sum_u * tmix) / static_cast<double>(in.n);
  return out;
}

CoverageReport empirical_coverage(const ProcessModel& model, const CoverageSpec& spec) {
  if (spec.reps < 1) throw std::invalid_argument("need at least one replication");
  if (spec.n < 1) throw std::invalid_argument("sequence length must be at least 1");
  if (spec.tau < 1 || spec.tau > spec.n)
    throw std::invalid_argument("block length outside [1, n]");
  if (spec.target_symbol >= model.alphabet_size())
    throw std::invalid_argument("target symbol outside the model alphabet");
  if (spec.bound == CoverageBound::self_normalized && !(spec.eps > 0.0))
    throw std::invalid_argument("self-normalized harness needs a positive mixing slack");

  const double p_true = model.stationary()[spec.target_symbol];
  const std::uint64_t blocks = spec.n / spec.tau;
  const bool need_blocks = spec.bound == CoverageBound::bernstein && !spec.v2;

  std::vector<double> deviation(spec.reps);
  std::vector<double> sums(spec.reps);
  std::vector<std::vector<double>> block_sums(need_blocks ? spec.reps : 0);

  parallel_for_index(spec.reps, spec.threads, [&](std::uint64_t r) {
    SplitMix64 rng = replication_stream(spec.seed, r);
    const std::vector<std::uint32_t> xs = model.sample(spec.n, rng);
    double total = 0.0;
    for (std::uint32_t x : xs) total += x == spec.target_symbol ? 1.0 : 0.0;
    sums[r] = total;
    deviation[r] = std::fabs(total / static_cast<double>(spec.n) - p_true);
    if (need_blocks) {
      std::vector<double>& slot = block_sums[r];
      slot.assign(blocks, 0.0);
      for (std::uint64_t j = 0; j < blocks * spec.tau; ++j)
        slot[j / spec.tau] += xs[j] == spec.target_symbol ? 1.0 : 0.0;
    }
  });

  CoverageReport report;
  report.bound = spec.bound;
  report.reps = spec.reps;

  std::uint64_t failures = 0;
  if (spec.bound == CoverageBound::bernstein) {
    double v2;
    if (spec.v2) {
      v2 = *spec.v2;
    } else {
      // Pooled two-pass sample variance of the per-block sums, in replication
      // order so the report is independent of scheduling.
      const std::uint64_t count = spec.reps * blocks;
      if (count < 2)
        throw std::invalid_argument("not enough blocks to estimate the block variance");
      double mean = 0.0, carry = 0.0;
      for (const auto& slot : block_sums)
        for (double s : slot) {
          double y = s - carry, t = mean + y;
          carry = (t - mean) - y;
          mean = t;
        }
      mean /= static_cast<double>(count);
      double ss = 0.0;
      carry = 0.0;
      for (const auto& slot : block_sums)
        for (double s : slot) {
          const double d = (s - mean) * (s - mean);
          double y = d - carry, t = ss + y;
          carry = (t - ss) - y;
          ss = t;
        }
      const double tau2 = static_cast<double>(spec.tau) * static_cast<double>(spec.tau);
      v2 = ss / static_cast<double>(count - 1) / tau2;
    }
    report.v2 = v2;
    const double radius = mixing_bernstein_radius(
        {spec.n, spec.tau, v2, 1.0, spec.delta, spec.eps});
    for (double d : deviation)
      if (d > radius) ++failures;
    report.nominal = bernstein_budget(spec.delta, spec.eps);
  } else {
    const double level = spec.eps / static_cast<double>(spec.n);
    report.tmix = model.mixing_time(level);
    for (std::uint64_t r = 0; r < spec.reps; ++r) {
      const SelfNormResult res = self_normalized_radius(
          {spec.n, 1.0, spec.delta, spec.eps, report.tmix, sums[r]});
      if (!res.ok()) {
        ++report.gate_failures;  // guarantee covers the joint event only
        continue;
      }
      if (deviation[r] > *res.radius) ++failures;
    }
    report.nominal = self_normalized_budget(spec.delta, spec.eps);
  }
  report.observed = static_cast<double>(failures) / static_cast<double>(spec.reps);
  return report;
}

}  // namespace countmass
