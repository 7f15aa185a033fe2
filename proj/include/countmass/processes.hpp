#pragma once

// Stationary finite-state sources with a known mixing structure. Four
// families: IID draws, ergodic Markov chains, hidden Markov models (latent
// ergodic chain plus per-state emission laws), and the duplication process
// that repeats each base draw k times with probability alpha. Every model
// exposes its stationary symbol law and a mixing-time oracle
//
//   t_mix(eps) = smallest window tau certifying dependence below eps,
//
// evaluated per family: 1 for IID, k for duplication, a total-variation proxy
// on the (latent) transition matrix for chains, or the geometric-rate bound
// ceil(log(mu/eps) / log(1/rho)) when a decay envelope (mu, rho) is supplied.

#include <cstdint>
#include <optional>
#include <vector>

#include "countmass/rng.hpp"
#include "countmass/seqcore.hpp"

namespace countmass {

using Matrix = std::vector<std::vector<double>>;

// Envelope alpha(tau) <= mu * rho^tau on the dependence coefficients.
struct MixingRate {
  double mu = 1.0;
  double rho = 0.5;
};

class ProcessModel {
 public:
  enum class Kind { iid, markov, hmm, duplication };

  static ProcessModel iid(std::vector<double> pi, std::optional<MixingRate> rate = std::nullopt);
  static ProcessModel markov(Matrix transition, std::optional<MixingRate> rate = std::nullopt);
  static ProcessModel hmm(Matrix transition, Matrix emission,
                          std::optional<MixingRate> rate = std::nullopt);
  static ProcessModel duplication(std::vector<double> pi, std::uint32_t k, double alpha,
                                  std::optional<MixingRate> rate = std::nullopt);

  Kind kind() const noexcept { return kind_; }
  std::uint32_t alphabet_size() const noexcept { return static_cast<std::uint32_t>(stationary_.size()); }
  const std::vector<double>& stationary() const noexcept { return stationary_; }
  const std::optional<MixingRate>& rate() const noexcept { return rate_; }
  std::uint32_t duplication_length() const noexcept { return dup_k_; }
  const Matrix& transition() const noexcept { return transition_; }  // markov/hmm latent chain

  std::uint64_t mixing_time(double eps) const;

  // Draws n symbols starting from the stationary law, consuming the stream in
  // a fixed documented order (initial state, then one uniform per step; HMM
  // draws latent then emission; duplication draws symbol then run length).
  std::vector<std::uint32_t> sample(std::uint64_t n, SplitMix64& rng) const;

 private:
  ProcessModel() = default;

  Kind kind_ = Kind::iid;
  std::vector<double> stationary_;       // observed symbol law
  std::optional<MixingRate> rate_;

  std::vector<double> base_cdf_;         // iid/duplication: cdf of pi; markov/hmm: cdf of state law
  Matrix transition_;                    // markov/hmm latent chain
  std::vector<std::vector<double>> row_cdf_;
  std::vector<std::vector<double>> emission_cdf_;
  std::vector<double> latent_stationary_;
  std::uint32_t dup_k_ = 0;
  double dup_alpha_ = 0.0;
};

// Unique stationary law of an ergodic (irreducible, aperiodic) row-stochastic
// matrix. Ergodicity is certified by strict positivity of some power up to
// m^2; the positivity pattern is iterated in boolean arithmetic, stopping
// early if the pattern cycles without filling. Direct solve up to 2000
// states, power iteration above.
std::vector<double> stationary_distribution(const Matrix& transition);

// ceil(log(mu/eps) / log(1/rho)), clamped to at least 1.
std::uint64_t mixing_time_from_rate(double mu, double rho, double eps);

// Smallest tau with max_x d_TV(P^tau(x,.), pi) <= eps. This total-variation
// statistic is a computable stand-in for the dependence coefficients, which
// have no tractable closed form. Matrix powers are iterated one step at a
// time with a hard cap of 10^6.
std::uint64_t markov_mixing_proxy(const Matrix& transition, double eps);

TokenSequence sample_trajectory(const ProcessModel& model, std::uint64_t n, std::uint64_t seed);

// Window the evaluation pipeline uses when none is requested: the model's
// mixing-time oracle at eps = n^-5, clamped to [1, n].
std::uint64_t default_window(const ProcessModel& model, std::uint64_t n);

}  // namespace countmass
