#include "countmass/processes.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <set>
#include <stdexcept>

namespace countmass {

namespace {

constexpr double kSimplexTol = 1e-12;
constexpr std::uint64_t kProxyCap = 1000000;

void check_distribution(const std::vector<double>& pi, const char* what) {
  if (pi.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (double v : pi)
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " has a negative entry");
  const double s = kahan_sum(pi);
  if (std::fabs(s - 1.0) > kSimplexTol)
    throw std::invalid_argument(std::string(what) + " does not sum to 1");
}

void check_stochastic(const Matrix& rows, std::size_t cols, const char* what) {
  if (rows.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (const auto& row : rows) {
    if (row.size() != cols)
      throw std::invalid_argument(std::string(what) + " rows differ in length");
    check_distribution(row, what);
  }
}

std::vector<double> cdf_of(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;  // guard against accumulated rounding at the top
  return cdf;
}

// Ergodicity certificate: some power of the transition pattern is strictly
// positive. Patterns are iterated in boolean arithmetic (no cancellation for
// nonnegative matrices, so this is the exact support of P^t); a repeated
// pattern means the supports cycle and the chain is periodic or reducible.
void check_primitive(const Matrix& transition) {
  const std::size_t m = transition.size();
  const std::size_t words = (m + 63) / 64;
  using Pattern = std::vector<std::uint64_t>;  // m rows of bit blocks, flattened

  Pattern base(m * words, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (transition[i][j] > 0.0) base[i * words + j / 64] |= 1ULL << (j % 64);

  const auto all_set = [&](const Pattern& p) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t expect = w + 1 < words ? ~0ULL : (m % 64 ? (1ULL << (m % 64)) - 1 : ~0ULL);
        if ((p[i * words + w] & expect) != expect) return false;
      }
    }
    return true;
  };

  Pattern cur = base;
  std::set<Pattern> seen;
  const std::uint64_t cap = static_cast<std::uint64_t>(m) * m;
  for (std::uint64_t t = 1; t <= cap; ++t) {
    if (all_set(cur)) return;
    if (!seen.insert(cur).second)
      throw std::invalid_argument("transition matrix is not ergodic: support pattern cycles");
    Pattern next(m * words, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (cur[i * words + j / 64] >> (j % 64) & 1ULL)
          for (std::size_t w = 0; w < words; ++w) next[i * words + w] |= base[j * words + w];
    cur = std::move(next);
  }
  throw std::invalid_argument("transition matrix is not ergodic: no strictly positive power");
}

std::vector<double> solve_stationary_direct(const Matrix& transition) {
  const std::size_t m = transition.size();
  Eigen::MatrixXd a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          transition[j][i] - (i == j ? 1.0 : 0.0);  // (P^T - I) x = 0
  for (std::size_t j = 0; j < m; ++j) a(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(j)) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  b(static_cast<Eigen::Index>(m - 1)) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw std::invalid_argument("transition matrix has no unique stationary law");
  Eigen::VectorXd x = lu.solve(b);

  std::vector<double> pi(m);
  for (std::size_t i = 0; i < m; ++i) {
    double v = x(static_cast<Eigen::Index>(i));
    if (v < -1e-10) throw std::invalid_argument("stationary solve produced a negative mass");
    pi[i] = v < 0.0 ? 0.0 : v;
  }
  const double total = kahan_sum(pi);
  for (double& v : pi) v /= total;
  return pi;
}

std::vector<double> solve_stationary_power(const Matrix& transition) {
  const std::size_t m = transition.size();
  std::vector<double> v(m, 1.0 / static_cast<double>(m)), next(m);
  for (std::uint64_t iter = 0; iter < kProxyCap; ++iter) {
    double residual = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += v[i] * transition[i][j];
      next[j] = acc;
      residual = std::max(residual, std::fabs(acc - v[j]));
    }
    const double total = kahan_sum(next);
    for (double& x : next) x /= total;
    v.swap(next);
    if (residual <= 1e-12) return v;
  }
  throw std::invalid_argument("power iteration for the stationary law did not converge");
}

void verify_stationary(const Matrix& transition, const std::vector<double>& pi) {
  const std::size_t m = transition.size();
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += pi[i] * transition[i][j];
    if (std::fabs(acc - pi[j]) > 1e-10)
      throw std::invalid_argument("stationary law fails the fixed-point residual check");
  }
}

// Iterate v <- vP until the floats stop changing. Rows of P^tau converge to
// this same fixed point, so measuring distance against it lets the proxy
// certify levels below the resolution of the TV statistic itself.
std::vector<double> refine_fixed_point(const Matrix& transition, std::vector<double> v) {
  const std::size_t m = transition.size();
  std::vector<double> next(m);
  for (int iter = 0; iter < 1000; ++iter) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += v[i] * transition[i][j];
      next[j] = acc;
    }
    if (next == v) break;
    v = next;
  }
  return v;
}

std::optional<std::uint64_t> proxy_bounded(const Matrix& transition, double eps,
                                           std::uint64_t max_tau) {
  check_stochastic(transition, transition.size(), "transition matrix");
  check_primitive(transition);
  if (!(eps > 0.0)) throw std::invalid_argument("proxy level must be positive");

  const std::size_t m = transition.size();
  const std::vector<double> pi = refine_fixed_point(
      transition, m <= 2000 ? solve_stationary_direct(transition) : solve_stationary_power(transition));

  Matrix power = transition;
  Matrix next(m, std::vector<double>(m));
  // The worst-row distance never increases step to step, and a primitive
  // matrix contracts strictly over any window of m^2 steps in exact
  // arithmetic. A long window with no strict decrease therefore means the
  // rounded iterates froze short of the target; more steps cannot certify
  // the level, so give up early instead of grinding to the cap.
  const std::uint64_t stall_window = std::max<std::uint64_t>(1024, static_cast<std::uint64_t>(m) * m + 1);
  double best = 2.0;
  std::uint64_t stalled = 0;
  for (std::uint64_t tau = 1; tau <= max_tau; ++tau) {
    double worst = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      double sum = 0.0;
      for (std::size_t y = 0; y < m; ++y) sum += std::fabs(power[x][y] - pi[y]);
      worst = std::max(worst, 0.5 * sum);
    }
    if (worst <= eps) return tau;
    if (worst < best) {
      best = worst;
      stalled = 0;
    } else if (++stalled >= stall_window) {
      return std::nullopt;
    }
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t y = 0; y < m; ++y) {
        double acc = 0.0;
        for (std::size_t z = 0; z < m; ++z) acc += power[x][z] * transition[z][y];
        next[x][y] = acc;
      }
    power.swap(next);
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> stationary_distribution(const Matrix& transition) {
  check_stochastic(transition, transition.size(), "transition matrix");
  check_primitive(transition);
  std::vector<double> pi = transition.size() <= 2000 ? solve_stationary_direct(transition)
                                                     : solve_stationary_power(transition);
  verify_stationary(transition, pi);
  return pi;
}

std::uint64_t mixing_time_from_rate(double mu, double rho, double eps) {
  if (!(mu > 0.0)) throw std::invalid_argument("decay amplitude must be positive");
  if (!(rho > 0.0) || !(rho < 1.0)) throw std::invalid_argument("decay rate must lie in (0,1)");
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("level must lie in (0,1]");
  const double bound = std::log(mu / eps) / std::log(1.0 / rho);
  if (bound <= 1.0) return 1;
  return static_cast<std::uint64_t>(std::ceil(bound));
}

std::uint64_t markov_mixing_proxy(const Matrix& transition, double eps) {
  if (auto tau = proxy_bounded(transition, eps, kProxyCap)) return *tau;
  // Also reachable when eps sits below what the iterated distances can
  // resolve in doubles (the row iterates stall a few ulps from the target).
  throw std::runtime_error("chain mixes too slowly for the requested level");
}

ProcessModel ProcessModel::iid(std::vector<double> pi, std::optional<MixingRate> rate) {
  check_distribution(pi, "symbol law");
  ProcessModel model;
  model.kind_ = Kind::iid;
  model.base_cdf_ = cdf_of(pi);
  model.stationary_ = std::move(pi);
  model.rate_ = rate;
  return model;
}

ProcessModel ProcessModel::markov(Matrix transition, std::optional<MixingRate> rate) {
  check_stochastic(transition, transition.size(), "transition matrix");
  ProcessModel model;
  model.kind_ = Kind::markov;
  model.stationary_ = stationary_distribution(transition);
  model.base_cdf_ = cdf_of(model.stationary_);
  model.row_cdf_.reserve(transition.size());
  for (const auto& row : transition) model.row_cdf_.push_back(cdf_of(row));
  model.transition_ = std::move(transition);
  model.rate_ = rate;
  return model;
}

ProcessModel ProcessModel::hmm(Matrix transition, Matrix emission, std::optional<MixingRate> rate) {
  check_stochastic(transition, transition.size(), "transition matrix");
  if (emission.size() != transition.size())
    throw std::invalid_argument("emission matrix needs one row per latent state");
  const std::size_t obs = emission.empty() ? 0 : emission.front().size();
  check_stochastic(emission, obs, "emission matrix");

  ProcessModel model;
  model.kind_ = Kind::hmm;
  model.latent_stationary_ = stationary_distribution(transition);
  model.stationary_.assign(obs, 0.0);
  for (std::size_t h = 0; h < emission.size(); ++h)
    for (std::size_t y = 0; y < obs; ++y)
      model.stationary_[y] += model.latent_stationary_[h] * emission[h][y];
  model.base_cdf_ = cdf_of(model.latent_stationary_);
  model.row_cdf_.reserve(transition.size());
  for (const auto& row : transition) model.row_cdf_.push_back(cdf_of(row));
  model.emission_cdf_.reserve(emission.size());
  for (const auto& row : emission) model.emission_cdf_.push_back(cdf_of(row));
  model.transition_ = std::move(transition);
  model.rate_ = rate;
  return model;
}

ProcessModel ProcessModel::duplication(std::vector<double> pi, std::uint32_t k, double alpha,
                                       std::optional<MixingRate> rate) {
  check_distribution(pi, "symbol law");
  if (k < 1) throw std::invalid_argument("duplication length must be at least 1");
  if (!(alpha >= 0.0) || alpha > 1.0)
    throw std::invalid_argument("duplication probability must lie in [0,1]");
  ProcessModel model;
  model.kind_ = Kind::duplication;
  model.base_cdf_ = cdf_of(pi);
  model.stationary_ = std::move(pi);
  model.dup_k_ = k;
  model.dup_alpha_ = alpha;
  model.rate_ = rate;
  return model;
}

std::uint64_t ProcessModel::mixing_time(double eps) const {
  if (rate_) return mixing_time_from_rate(rate_->mu, rate_->rho, eps);
  switch (kind_) {
    case Kind::iid:
      return 1;
    case Kind::duplication:
      return dup_k_;
    case Kind::markov:
    case Kind::hmm:
      return markov_mixing_proxy(transition_, eps);
  }
  throw std::logic_error("unreachable model kind");
}

std::vector<std::uint32_t> ProcessModel::sample(std::uint64_t n, SplitMix64& rng) const {
  std::vector<std::uint32_t> out;
  out.reserve(n);
  switch (kind_) {
    case Kind::iid:
      for (std::uint64_t t = 0; t < n; ++t) out.push_back(sample_cdf(base_cdf_, rng.next_double()));
      break;
    case Kind::markov: {
      if (n == 0) break;
      std::uint32_t state = sample_cdf(base_cdf_, rng.next_double());
      out.push_back(state);
      for (std::uint64_t t = 1; t < n; ++t) {
        state = sample_cdf(row_cdf_[state], rng.next_double());
        out.push_back(state);
      }
      break;
    }
    case Kind::hmm: {
      if (n == 0) break;
      std::uint32_t latent = sample_cdf(base_cdf_, rng.next_double());
      out.push_back(sample_cdf(emission_cdf_[latent], rng.next_double()));
      for (std::uint64_t t = 1; t < n; ++t) {
        latent = sample_cdf(row_cdf_[latent], rng.next_double());
        out.push_back(sample_cdf(emission_cdf_[latent], rng.next_double()));
      }
      break;
    }
    case Kind::duplication:
      while (out.size() < n) {
        const std::uint32_t x = sample_cdf(base_cdf_, rng.next_double());
        const bool duplicate = rng.next_double() < dup_alpha_;
        const std::uint64_t copies = duplicate ? dup_k_ : 1;
        for (std::uint64_t c = 0; c < copies && out.size() < n; ++c) out.push_back(x);
      }
      break;
  }
  return out;
}

TokenSequence sample_trajectory(const ProcessModel& model, std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("trajectory length must be at least 1");
  SplitMix64 rng(seed);
  return TokenSequence::from_ids(model.sample(n, rng), model.alphabet_size());
}

std::uint64_t default_window(const ProcessModel& model, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("sequence length must be at least 1");
  const double eps = std::pow(static_cast<double>(n), -5.0);
  std::uint64_t window;
  if (!model.rate() &&
      (model.kind() == ProcessModel::Kind::markov || model.kind() == ProcessModel::Kind::hmm)) {
    // The clamp makes any certification beyond n irrelevant, so the proxy can
    // stop there instead of walking toward its global cap.
    auto tau = proxy_bounded(model.transition(), eps, std::min<std::uint64_t>(n, kProxyCap));
    window = tau.value_or(n);
  } else {
    window = model.mixing_time(eps);
  }
  if (window < 1) window = 1;
  return std::min(window, n);
}

}  // namespace countmass
