#include "countmass/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace countmass {

namespace {

std::vector<std::vector<std::uint32_t>> positions_by_symbol(const TokenSequence& seq) {
  std::uint32_t bound = 0;
  for (std::uint32_t s : seq.symbols) bound = std::max(bound, s + 1);
  std::vector<std::vector<std::uint32_t>> pos(bound);
  for (std::uint32_t i = 0; i < seq.symbols.size(); ++i)
    pos[seq.symbols[i]].push_back(i);  // ascending by construction
  return pos;
}

// Occurrences of seq[i]'s symbol at positions k with |k - i| < tau, i.e. in
// [i - tau + 1, i + tau - 1] clipped to the sequence.
std::uint64_t in_window_count(const std::vector<std::uint32_t>& pos, std::size_t i,
                              std::uint64_t tau) {
  const std::uint64_t lo = i + 1 >= tau ? i + 1 - tau : 0;
  const std::uint64_t hi = i + tau - 1;  // inclusive
  auto first = std::lower_bound(pos.begin(), pos.end(), lo);
  auto last = std::upper_bound(pos.begin(), pos.end(), hi);
  return static_cast<std::uint64_t>(last - first);
}

}  // namespace

std::uint64_t leave_window_count(const TokenSequence& seq, std::size_t i, std::uint64_t tau) {
  if (i >= seq.size()) throw std::invalid_argument("position outside the sequence");
  if (tau < 1) throw std::invalid_argument("window radius must be at least 1");
  const std::uint32_t x = seq.symbols[i];
  std::uint64_t total = 0, inside = 0;
  for (std::uint64_t k = 0; k < seq.size(); ++k) {
    if (seq.symbols[k] != x) continue;
    ++total;
    const std::uint64_t dist = k > i ? k - i : i - k;
    if (dist < tau) ++inside;
  }
  return total - inside;
}

CountMassVector wingit_vector(const TokenSequence& seq, std::uint64_t tau, std::uint64_t zeta_max) {
  const std::uint64_t n = seq.size();
  if (tau < 1 || tau > n) throw std::invalid_argument("window radius outside [1, n]");
  if (zeta_max > n) throw std::invalid_argument("zeta_max exceeds sequence length");

  const auto pos = positions_by_symbol(seq);
  CountMassVector out;
  out.mass.assign(n + 1, 0.0);
  out.numer.assign(n + 1, 0);
  out.denom = n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = pos[seq.symbols[i]];
    const std::uint64_t c = p.size() - in_window_count(p, i, tau);
    if (c <= zeta_max) ++out.numer[c];
  }
  const double dn = static_cast<double>(n);
  for (std::uint64_t z = 0; z <= n; ++z)
    if (out.numer[z] > 0) out.mass[z] = static_cast<double>(out.numer[z]) / dn;
  if (zeta_max == n) out.normalized = true;  // counts partition the n positions
  return out;
}

std::uint64_t wingit_skipped_count(const TokenSequence& seq, std::uint64_t tau,
                                   std::uint64_t offset, std::uint64_t zeta) {
  const std::uint64_t n = seq.size();
  if (tau < 1 || tau > n) throw std::invalid_argument("window radius outside [1, n]");
  if (offset >= 2 * tau) throw std::invalid_argument("offset outside [0, 2*tau)");
  if (n % (2 * tau) != 0)
    throw std::invalid_argument("thinned estimator needs 2*tau to divide the length");
  const std::uint64_t n0 = n / (2 * tau);

  const auto pos = positions_by_symbol(seq);
  std::uint64_t hits = 0;
  for (std::uint64_t j = 1; j <= n0; ++j) {
    const std::uint64_t i = 2 * tau * j - offset - 1;  // zero-based probe
    const auto& p = pos[seq.symbols[i]];
    if (p.size() - in_window_count(p, i, tau) == zeta) ++hits;
  }
  return hits;
}

double wingit_skipped(const TokenSequence& seq, std::uint64_t tau, std::uint64_t offset,
                      std::uint64_t zeta) {
  const std::uint64_t n0 = seq.size() / (2 * tau);
  return static_cast<double>(wingit_skipped_count(seq, tau, offset, zeta)) /
         static_cast<double>(n0);
}

CountMassVector plugin_vector(const CountTable& counts) {
  const std::uint64_t n = counts.total();
  if (n == 0) throw std::invalid_argument("plug-in estimator needs a nonempty sequence");
  FrequencyProfile profile = frequency_profile(counts);
  CountMassVector out;
  out.mass.assign(n + 1, 0.0);
  out.numer.assign(n + 1, 0);
  out.denom = n;
  const double dn = static_cast<double>(n);
  for (std::uint64_t z = 1; z <= n; ++z) {
    if (profile.phi[z] == 0) continue;
    out.numer[z] = z * profile.phi[z];
    out.mass[z] = static_cast<double>(out.numer[z]) / dn;
  }
  out.normalized = true;  // sum of z*phi_z over z is exactly n
  return out;
}

CountMassVector plugin_vector(const TokenSequence& seq) {
  return plugin_vector(occurrence_counts(seq));
}

HybridResult hybrid_estimate(const TokenSequence& seq, const HybridConfig& cfg) {
  const std::uint64_t n = seq.size();
  if (cfg.zeta_bar > n) throw std::invalid_argument("transition count exceeds sequence length");

  const CountMassVector windowed = wingit_vector(seq, cfg.tau, cfg.zeta_bar);
  const CountMassVector plug = plugin_vector(seq);

  HybridResult result;
  CountMassVector& u = result.unnormalized;
  u.mass.assign(n + 1, 0.0);
  u.numer.assign(n + 1, 0);
  u.denom = n;
  std::uint64_t numer_total = 0;
  for (std::uint64_t z = 0; z <= n; ++z) {
    u.numer[z] = z <= cfg.zeta_bar ? windowed.numer[z] : plug.numer[z];
    u.mass[z] = z <= cfg.zeta_bar ? windowed.mass[z] : plug.mass[z];
    numer_total += u.numer[z];
  }
  result.nu = static_cast<double>(numer_total) / static_cast<double>(n);

  if (numer_total == 0) {
    // Unreachable for n >= 1 (every position lands on one side of the split),
    // but the contract keeps sweeps total rather than failing.
    result.fallback = true;
    result.mass = plug;
    return result;
  }

  // Normalized entries share the integer denominator numer_total, so the
  // total reduces exactly to 1.
  result.mass.mass.assign(n + 1, 0.0);
  result.mass.numer = u.numer;
  result.mass.denom = numer_total;
  const double dt = static_cast<double>(numer_total);
  for (std::uint64_t z = 0; z <= n; ++z)
    if (u.numer[z] > 0) result.mass.mass[z] = static_cast<double>(u.numer[z]) / dt;
  result.mass.normalized = true;
  return result;
}

std::uint64_t default_transition_point(std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  std::uint64_t k = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(n)));
  const auto cube_leq = [n](std::uint64_t v) {
    return v <= 2642245 && v * v * v <= n;  // 2642245^3 is the last cube below 2^64
  };
  while (!cube_leq(k)) --k;
  while (cube_leq(k + 1)) ++k;
  return k > 0 ? k - 1 : 0;
}

double NaturalDistribution::total() const {
  return kahan_sum(observed) + static_cast<double>(unseen_count) * unseen_each + unseen_lump;
}

NaturalDistribution natural_from_count_mass(const CountMassVector& m, const CountTable& counts,
                                            std::optional<std::uint64_t> alphabet_size) {
  const std::uint64_t n = counts.total();
  if (m.mass.size() != n + 1)
    throw std::invalid_argument("count-mass vector length does not match the sequence");
  if (!m.normalized) throw std::invalid_argument("count-mass vector must be normalized");
  FrequencyProfile profile = frequency_profile(counts, alphabet_size);

  NaturalDistribution q;
  q.alphabet_known = profile.phi0_known;
  q.unseen_count = profile.phi[0];

  // Mass per count class; classes nobody realized feed the unseen pool.
  std::vector<double> class_mass(n + 1, 0.0);
  double orphaned = m.mass[0];
  for (std::uint64_t z = 1; z <= n; ++z) {
    if (m.mass[z] == 0.0) continue;
    if (profile.phi[z] > 0)
      class_mass[z] = m.mass[z] / static_cast<double>(profile.phi[z]);
    else
      orphaned += m.mass[z];
  }

  q.observed.assign(counts.id_bound(), 0.0);
  counts.for_each([&](std::uint32_t x, std::uint64_t c) { q.observed[x] = class_mass[c]; });

  if (q.alphabet_known && q.unseen_count > 0)
    q.unseen_each = orphaned / static_cast<double>(q.unseen_count);
  else
    q.unseen_lump = orphaned;
  return q;
}

double tv_natural(const NaturalDistribution& a, const NaturalDistribution& b) {
  if (a.observed.size() != b.observed.size() || a.alphabet_known != b.alphabet_known ||
      a.unseen_count != b.unseen_count)
    throw std::invalid_argument("natural distributions live on different alphabets");
  double sum = std::fabs(a.unseen_lump - b.unseen_lump) +
               static_cast<double>(a.unseen_count) * std::fabs(a.unseen_each - b.unseen_each);
  double carry = 0.0;
  for (std::size_t x = 0; x < a.observed.size(); ++x) {
    double y = std::fabs(a.observed[x] - b.observed[x]) - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return 0.5 * sum;
}

}  // namespace countmass
