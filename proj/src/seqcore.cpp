#include "countmass/seqcore.hpp"

#include <cmath>
#include <stdexcept>

namespace countmass {

TokenSequence TokenSequence::from_ids(std::vector<std::uint32_t> ids, std::uint32_t alphabet_size) {
  TokenSequence seq;
  seq.symbols = std::move(ids);
  for (std::uint32_t s : seq.symbols)
    if (s >= alphabet_size) throw std::invalid_argument("symbol id exceeds alphabet size");
  seq.id_to_token.reserve(alphabet_size);
  for (std::uint32_t i = 0; i < alphabet_size; ++i) {
    seq.id_to_token.push_back(std::to_string(i));
    seq.token_to_id.emplace(seq.id_to_token.back(), i);
  }
  return seq;
}

TokenSequence ingest_tokens(const std::vector<std::string>& tokens) {
  TokenSequence seq;
  seq.symbols.reserve(tokens.size());
  for (const std::string& tok : tokens) {
    auto [it, inserted] =
        seq.token_to_id.emplace(tok, static_cast<std::uint32_t>(seq.id_to_token.size()));
    if (inserted) seq.id_to_token.push_back(tok);
    seq.symbols.push_back(it->second);
  }
  return seq;
}

CountTable::CountTable(const TokenSequence& seq) {
  std::uint32_t bound = 0;
  for (std::uint32_t s : seq.symbols) bound = std::max(bound, s + 1);
  counts_.assign(bound, 0);
  for (std::uint32_t s : seq.symbols) ++counts_[s];
  total_ = seq.symbols.size();
  for (std::uint64_t c : counts_) {
    if (c > 0) ++distinct_;
    max_count_ = std::max(max_count_, c);
  }
}

CountTable occurrence_counts(const TokenSequence& seq) { return CountTable(seq); }

FrequencyProfile frequency_profile(const CountTable& counts,
                                   std::optional<std::uint64_t> alphabet_size) {
  FrequencyProfile profile;
  profile.phi.assign(counts.total() + 1, 0);
  counts.for_each([&](std::uint32_t, std::uint64_t c) { ++profile.phi[c]; });
  if (alphabet_size) {
    if (*alphabet_size < counts.distinct())
      throw std::invalid_argument("alphabet size smaller than observed support");
    profile.phi[0] = *alphabet_size - counts.distinct();
    profile.phi0_known = true;
  }
  return profile;
}

double kahan_sum(std::span<const double> values) noexcept {
  // Kahan-Babuska (Neumaier) form: the correction survives even when the next
  // summand dwarfs the running sum, unlike the textbook loop.
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double CountMassVector::sum() const {
  if (!numer.empty() && denom > 0) {
    // Integer reduction: numerators are exact in double up to 2^53.
    std::uint64_t total = 0;
    for (std::uint64_t k : numer) total += k;
    return static_cast<double>(total) / static_cast<double>(denom);
  }
  return kahan_sum(mass);
}

double spread(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) throw std::invalid_argument("spread needs at least two values");
  double sum = 0.0, sum_sq = 0.0, c1 = 0.0, c2 = 0.0;
  const double origin = values[0];
  for (double v : values) {
    const double b = v - origin;
    double y = b - c1, t = sum + y;
    c1 = (t - sum) - y;
    sum = t;
    y = b * b - c2;
    t = sum_sq + y;
    c2 = (t - sum_sq) - y;
    sum_sq = t;
  }
  const double md = static_cast<double>(m);
  const double value = (md * sum_sq - sum * sum) / (md * (md - 1.0));
  return value < 0.0 ? 0.0 : value;  // rounding can leave a tiny negative residue
}

namespace {

double abs_diff_sum(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distance arguments differ in length");
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double y = std::fabs(p[i] - q[i]) - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

double tv_distance(std::span<const double> p, std::span<const double> q) {
  return 0.5 * abs_diff_sum(p, q);
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
  return abs_diff_sum(p, q);
}

}  // namespace countmass
