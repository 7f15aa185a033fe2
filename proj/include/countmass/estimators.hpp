#pragma once

// Count-mass estimators built from leave-a-window-out counts.
//
// For a window radius tau, position i ignores the indices k with |k - i| < tau
// and counts the remaining occurrences of its own symbol:
//
//   c_i = N_{X_i} - #{k : |k - i| < tau, X_k = X_i}.
//
// The windowed estimator puts mass (1/n) #{i : c_i = z} on count value z; with
// tau = 1 this is the classic leave-one-out (Good-Turing) rule (z+1) phi_{z+1} / n.
// The plug-in estimator puts z phi_z / n on z. The hybrid uses the windowed
// entries up to a transition count zeta_bar, plug-in entries above it, and
// renormalizes by the total nu.

#include <cstdint>
#include <optional>

#include "countmass/seqcore.hpp"

namespace countmass {

// Occurrences of the symbol at (zero-based) position i outside the window of
// radius tau around i. Windows truncate at the sequence boundary; there is no
// wraparound.
std::uint64_t leave_window_count(const TokenSequence& seq, std::size_t i, std::uint64_t tau);

// Mass vector of leave-window counts: entry z = (1/n) #{i : c_i = z} for
// z <= zeta_max, zero above. With zeta_max = n the entries partition the n
// positions, so the vector totals exactly 1. Computed with per-symbol sorted
// position lists (two binary searches per index), O(n log n) overall.
CountMassVector wingit_vector(const TokenSequence& seq, std::uint64_t tau, std::uint64_t zeta_max);

// Thinned variant probing every (2 tau)-th position. With one-based positions
// the probes are i = 2*tau*j - offset for j = 1..n/(2*tau); the offset ranges
// over [0, 2*tau). Averaging over all offsets recovers wingit_vector exactly,
// which is what makes the thinning analysis-friendly. Requires 2*tau | n.
double wingit_skipped(const TokenSequence& seq, std::uint64_t tau, std::uint64_t offset,
                      std::uint64_t zeta);

// Number of probes hitting leave-window count zeta; wingit_skipped is this
// over n/(2*tau). Exposed so identity tests can compare integers.
std::uint64_t wingit_skipped_count(const TokenSequence& seq, std::uint64_t tau,
                                   std::uint64_t offset, std::uint64_t zeta);

// Plug-in mass vector: entry z = z * phi_z / n. Sums to exactly 1 because the
// numerators z*phi_z partition the n positions by their symbol's count.
CountMassVector plugin_vector(const CountTable& counts);
CountMassVector plugin_vector(const TokenSequence& seq);

struct HybridConfig {
  std::uint64_t tau = 1;       // 1 <= tau <= n
  std::uint64_t zeta_bar = 0;  // 0 <= zeta_bar <= n
};

struct HybridResult {
  CountMassVector mass;          // normalized; carries the exact-numerator witness
  CountMassVector unnormalized;  // windowed entries below zeta_bar, plug-in above
  double nu = 0.0;               // total of the unnormalized entries
  bool fallback = false;         // nu == 0 fell back to the plug-in vector
};

HybridResult hybrid_estimate(const TokenSequence& seq, const HybridConfig& cfg);

// Transition count used when none is requested: max(0, floor(cbrt(n)) - 1),
// with the cube root taken exactly over the integers.
std::uint64_t default_transition_point(std::uint64_t n);

// Distribution that gives every symbol sharing a count the same mass. Built by
// splitting a count-mass vector across the count classes of one sequence.
// Mass on count values with an empty class cannot be attached to any symbol;
// it joins the unseen pool: split across unseen symbols when the alphabet size
// is known and some symbols are unseen, otherwise kept as an aggregate lump.
struct NaturalDistribution {
  std::vector<double> observed;    // per-symbol mass, indexed by symbol id
  bool alphabet_known = false;
  std::uint64_t unseen_count = 0;  // symbols never observed (alphabet known)
  double unseen_each = 0.0;        // mass on each unseen symbol
  double unseen_lump = 0.0;        // aggregate mass attached to no symbol

  double total() const;
};

NaturalDistribution natural_from_count_mass(const CountMassVector& m, const CountTable& counts,
                                            std::optional<std::uint64_t> alphabet_size = std::nullopt);

// TV distance between two natural distributions over the same working
// alphabet. Aggregate lumps are compared as a single extra atom.
double tv_natural(const NaturalDistribution& a, const NaturalDistribution& b);

}  // namespace countmass
