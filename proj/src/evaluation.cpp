#include "countmass/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "countmass/parallel.hpp"

namespace countmass {

CountMassVector true_count_mass(const GroundTruth& truth, const CountTable& counts) {
  const std::uint64_t n = counts.total();
  if (counts.id_bound() > truth.pi.size())
    throw std::invalid_argument("observed symbol outside the ground-truth support");

  CountMassVector out;
  out.mass.assign(n + 1, 0.0);
  std::vector<double> carry(n + 1, 0.0);
  for (std::uint32_t x = 0; x < truth.pi.size(); ++x) {
    const std::uint64_t z = counts.count(x);
    double y = truth.pi[x] - carry[z];
    double t = out.mass[z] + y;
    carry[z] = (t - out.mass[z]) - y;
    out.mass[z] = t;
  }
  out.normalized = true;  // classes partition the alphabet
  return out;
}

NaturalDistribution oracle_natural(const GroundTruth& truth, const CountTable& counts) {
  const CountMassVector m = true_count_mass(truth, counts);
  return natural_from_count_mass(m, counts, truth.pi.size());
}

double tv_against_truth(const GroundTruth& truth, const CountTable& counts,
                        const NaturalDistribution& q) {
  if (!q.alphabet_known || q.observed.size() > truth.pi.size() ||
      q.unseen_count != truth.pi.size() - counts.distinct())
    throw std::invalid_argument("natural distribution does not match the ground-truth alphabet");
  double sum = q.unseen_lump;  // mass attached to no symbol is pure discrepancy
  double carry = 0.0;
  for (std::uint32_t x = 0; x < truth.pi.size(); ++x) {
    const double qx = counts.count(x) > 0 ? q.observed[x] : q.unseen_each;
    double y = std::fabs(truth.pi[x] - qx) - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return 0.5 * sum;
}

double hybrid_risk_rate(std::uint64_t n, std::uint64_t tau) {
  if (n < 2) throw std::invalid_argument("rate shape needs n >= 2");
  if (tau < 1) throw std::invalid_argument("window must be at least 1");
  return std::sqrt(static_cast<double>(tau) * std::log(static_cast<double>(n))) /
         std::pow(static_cast<double>(n), 1.0 / 6.0);
}

double plugin_error_bound(std::uint64_t zeta, std::uint64_t tau0, std::uint64_t phi_zeta,
                          std::uint64_t n, double delta) {
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  if (tau0 < 1) throw std::invalid_argument("mixing time must be at least 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("failure budget must lie in (0,1)");
  return std::sqrt(static_cast<double>(zeta) * static_cast<double>(tau0)) *
         static_cast<double>(phi_zeta) *
         std::sqrt(std::log(static_cast<double>(n) / delta)) / static_cast<double>(n);
}

double plugin_bound_count_threshold(std::uint64_t tau0, std::uint64_t n, double delta) {
  if (n < 1 || tau0 < 1) throw std::invalid_argument("threshold needs n >= 1 and tau0 >= 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("failure budget must lie in (0,1)");
  const double t0 = static_cast<double>(tau0);
  const double first = 36.0 * t0 * std::log(22.0 * static_cast<double>(n) / delta);
  const double log11 = std::log(11.0 * static_cast<double>(n) / delta);
  const double second = 1.0 + std::sqrt((4.0 + 8.0 * t0) * log11) + 4.0 * t0 * log11 / 3.0;
  return std::max(first, second);
}

double wingit_error_bound(std::uint64_t zeta, std::uint64_t tau, std::uint64_t n,
                          std::span<const double> em) {
  if (tau < 1) throw std::invalid_argument("window must be at least 1");
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  if (em.size() != 4 * tau - 1)
    throw std::invalid_argument("expected-mass input must have length 4*tau - 1");
  for (double v : em)
    if (!(v >= 0.0)) throw std::invalid_argument("expected masses must be nonnegative");

  const double dz = static_cast<double>(zeta);
  const double dtau = static_cast<double>(tau);
  const double dn = static_cast<double>(n);
  double tail = 0.0, carry = 0.0;
  for (std::uint64_t u = 1; u < em.size(); ++u) {
    const double term = (dz + static_cast<double>(u)) / static_cast<double>(u) * em[u];
    double y = term - carry, t = tail + y;
    carry = (t - tail) - y;
    tail = t;
  }
  return std::sqrt(dtau / dn) *
             (std::sqrt(em[0]) + std::sqrt(dz * std::log(2.0 * dtau) * em[0]) + std::sqrt(tail)) +
         (dz + 1.0) * dtau / dn;
}

RiskReport tv_risk_monte_carlo(const ProcessModel& model, const RiskSpec& spec,
                               const std::function<void(const ReplicationView&)>& inspect) {
  if (spec.n < 2) throw std::invalid_argument("risk evaluation needs n >= 2");
  if (spec.reps < 1) throw std::invalid_argument("need at least one replication");
  if (spec.tau < 1 || spec.tau > spec.n) throw std::invalid_argument("window outside [1, n]");
  if (spec.zeta_bar > spec.n) throw std::invalid_argument("transition count exceeds n");

  const GroundTruth truth{model.stationary()};
  const std::uint64_t zeta_cap =
      spec.per_zeta_full ? spec.n : std::min(spec.n, 3 * spec.zeta_bar);

  std::vector<double> tv(spec.reps), l1(spec.reps);
  std::vector<std::vector<double>> abs_err(spec.per_zeta ? spec.reps : 0);

  parallel_for_index(spec.reps, spec.threads, [&](std::uint64_t r) {
    SplitMix64 rng = replication_stream(spec.seed, r);
    const TokenSequence seq =
        TokenSequence::from_ids(model.sample(spec.n, rng), model.alphabet_size());
    const CountTable counts(seq);
    const CountMassVector truth_mass = true_count_mass(truth, counts);

    CountMassVector estimate, unnormalized;
    double nu = 1.0;
    bool fallback = false;
    switch (spec.estimator) {
      case EstimatorKind::hybrid: {
        HybridResult h = hybrid_estimate(seq, {spec.tau, spec.zeta_bar});
        estimate = std::move(h.mass);
        unnormalized = std::move(h.unnormalized);
        nu = h.nu;
        fallback = h.fallback;
        break;
      }
      case EstimatorKind::wingit:
        estimate = wingit_vector(seq, spec.tau, spec.n);
        unnormalized = estimate;
        break;
      case EstimatorKind::plugin:
        estimate = plugin_vector(counts);
        unnormalized = estimate;
        break;
    }

    tv[r] = tv_distance(estimate, truth_mass);
    l1[r] = l1_distance(estimate, truth_mass);
    if (spec.per_zeta) {
      std::vector<double>& slot = abs_err[r];
      slot.assign(zeta_cap + 1, 0.0);
      for (std::uint64_t z = 0; z <= zeta_cap; ++z)
        slot[z] = std::fabs(estimate.mass[z] - truth_mass.mass[z]);
    }
    if (inspect)
      inspect(ReplicationView{r, seq, counts, estimate, unnormalized, truth_mass, nu, fallback,
                              tv[r], l1[r]});
  });

  RiskReport report;
  report.n = spec.n;
  report.tau = spec.tau;
  report.zeta_bar = spec.zeta_bar;
  report.reps = spec.reps;
  report.tv_mean = kahan_sum(tv) / static_cast<double>(spec.reps);
  report.l1_mean = kahan_sum(l1) / static_cast<double>(spec.reps);
  if (spec.reps > 1) {
    double ss = 0.0, carry = 0.0;
    for (double v : tv) {
      const double d = (v - report.tv_mean) * (v - report.tv_mean);
      double y = d - carry, t = ss + y;
      carry = (t - ss) - y;
      ss = t;
    }
    report.tv_se = std::sqrt(ss / static_cast<double>(spec.reps - 1) /
                             static_cast<double>(spec.reps));
  }
  report.theory_rate = hybrid_risk_rate(spec.n, spec.tau);
  if (spec.per_zeta) {
    report.per_zeta_mae.assign(zeta_cap + 1, 0.0);
    for (std::uint64_t z = 0; z <= zeta_cap; ++z) {
      double acc = 0.0, carry = 0.0;
      for (const auto& rep : abs_err) {
        double y = rep[z] - carry, t = acc + y;
        carry = (t - acc) - y;
        acc = t;
      }
      report.per_zeta_mae[z] = acc / static_cast<double>(spec.reps);
    }
  }
  return report;
}

}  // namespace countmass
