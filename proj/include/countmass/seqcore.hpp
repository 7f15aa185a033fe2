#pragma once

// Token streams over a dense integer alphabet and the count statistics the
// estimators consume: occurrence counts N_x, the frequency-of-frequencies
// profile phi_z = #{x : N_x = z}, and vectors of probability mass indexed by
// count value. Distances and the pairwise spread statistic live here too.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace countmass {

// Input tokens re-encoded as IDs 0,1,2,... in first-appearance order. The
// encoding is a pure relabeling: id_to_token inverts token_to_id, so the
// original stream can always be reconstructed.
struct TokenSequence {
  std::vector<std::uint32_t> symbols;
  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, std::uint32_t> token_to_id;

  std::size_t size() const noexcept { return symbols.size(); }

  // Wraps model-generated state indices; vocab is the decimal spelling of
  // each id. alphabet_size bounds the ids, not the observed support.
  static TokenSequence from_ids(std::vector<std::uint32_t> ids, std::uint32_t alphabet_size);
};

TokenSequence ingest_tokens(const std::vector<std::string>& tokens);

// Occurrence counts for the observed support only: count(x) == 0 means x was
// never seen and is not an entry. Backing storage is a dense array because
// ids are dense; iteration skips the zeros.
class CountTable {
 public:
  CountTable() = default;
  explicit CountTable(const TokenSequence& seq);

  std::uint64_t count(std::uint32_t x) const noexcept {
    return x < counts_.size() ? counts_[x] : 0;
  }
  std::uint64_t total() const noexcept { return total_; }       // n
  std::uint64_t distinct() const noexcept { return distinct_; }
  std::uint64_t max_count() const noexcept { return max_count_; }
  std::uint32_t id_bound() const noexcept { return static_cast<std::uint32_t>(counts_.size()); }

  template <class F>
  void for_each(F&& f) const {
    for (std::uint32_t x = 0; x < counts_.size(); ++x)
      if (counts_[x] > 0) f(x, counts_[x]);
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t distinct_ = 0;
  std::uint64_t max_count_ = 0;
};

CountTable occurrence_counts(const TokenSequence& seq);

// phi[z] = number of symbols with count exactly z, for z in [1, n]. phi[0] is
// the number of alphabet symbols never observed, which is knowable only when
// the alphabet size is supplied; phi0_known distinguishes "0" from "unknown".
struct FrequencyProfile {
  std::vector<std::uint64_t> phi;  // length n+1
  bool phi0_known = false;
};

FrequencyProfile frequency_profile(const CountTable& counts,
                                   std::optional<std::uint64_t> alphabet_size = std::nullopt);

// Probability mass per count value z = 0..n. Estimators that build entries as
// integer counts over a common denominator keep the numerators; sum() then
// reduces over exact integers, so "sums to 1" holds exactly, not just to
// rounding. Vectors without a witness fall back to compensated summation.
struct CountMassVector {
  std::vector<double> mass;  // length n+1
  bool normalized = false;

  std::vector<std::uint64_t> numer;  // empty when no exactness witness
  std::uint64_t denom = 0;           // meaningful only when numer is nonempty

  double sum() const;
};

double kahan_sum(std::span<const double> values) noexcept;

// Mean squared pairwise difference (1/(m(m-1))) sum_{i<j} (a_i - a_j)^2,
// via the O(m) identity (m*sum(b^2) - (sum b)^2) / (m(m-1)) after centering
// at a[0]. Centering keeps constant inputs at exactly 0.
double spread(std::span<const double> values);

double tv_distance(std::span<const double> p, std::span<const double> q);
double l1_distance(std::span<const double> p, std::span<const double> q);

inline double tv_distance(const CountMassVector& p, const CountMassVector& q) {
  return tv_distance(std::span<const double>(p.mass), std::span<const double>(q.mass));
}
inline double l1_distance(const CountMassVector& p, const CountMassVector& q) {
  return l1_distance(std::span<const double>(p.mass), std::span<const double>(q.mass));
}

}  // namespace countmass
