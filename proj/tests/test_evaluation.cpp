#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "countmass/estimators.hpp"
#include "countmass/evaluation.hpp"
#include "countmass/processes.hpp"
#include "countmass/seqcore.hpp"

using namespace countmass;

namespace {

TokenSequence seq_of(std::vector<std::uint32_t> ids, std::uint32_t alphabet) {
  return TokenSequence::from_ids(std::move(ids), alphabet);
}

// Exact TV risk by enumerating every trajectory with its probability. The
// estimate is recomputed per sequence exactly the way the sampled harness
// does it, so agreement pins the whole pipeline, not just the estimator.
double exact_tv_risk(const ProcessModel& model, std::uint64_t n,
                     const std::function<CountMassVector(const TokenSequence&)>& estimate) {
  const std::uint32_t a = model.alphabet_size();
  const GroundTruth truth{model.stationary()};
  const auto& pi = truth.pi;

  std::vector<std::uint32_t> ids(n, 0);
  double risk = 0.0, total_prob = 0.0;
  while (true) {
    double p = pi[ids[0]];
    for (std::uint64_t t = 1; t < n; ++t) {
      if (model.kind() == ProcessModel::Kind::markov)
        p *= model.transition()[ids[t - 1]][ids[t]];
      else
        p *= pi[ids[t]];
    }
    const TokenSequence seq = seq_of(ids, a);
    const CountTable counts(seq);
    risk += p * tv_distance(estimate(seq), true_count_mass(truth, counts));
    total_prob += p;

    std::size_t pos = n;
    while (pos > 0 && ids[pos - 1] + 1 == a) ids[--pos] = 0;
    if (pos == 0) break;
    ++ids[pos - 1];
  }
  REQUIRE(total_prob == doctest::Approx(1.0).epsilon(1e-12));
  return risk;
}

}  // namespace

TEST_CASE("true count mass collects stationary weight by observed count") {
  GroundTruth uniform{{0.25, 0.25, 0.25, 0.25}};
  const TokenSequence seq = seq_of({0, 1, 0, 2}, 4);
  const CountTable counts(seq);
  const CountMassVector m = true_count_mass(uniform, counts);
  REQUIRE(m.mass.size() == 5);
  CHECK(m.mass[0] == 0.25);  // the one unseen symbol
  CHECK(m.mass[1] == 0.5);   // symbols 1 and 2
  CHECK(m.mass[2] == 0.25);  // symbol 0
  CHECK(m.mass[3] == 0.0);
  CHECK(m.mass[4] == 0.0);
  CHECK(m.normalized);
  CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-15));

  GroundTruth skew{{0.5, 0.3, 0.1, 0.1}};
  const CountMassVector s = true_count_mass(skew, counts);
  CHECK(s.mass[0] == 0.1);
  CHECK(s.mass[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(s.mass[2] == 0.5);

  GroundTruth small{{0.6, 0.4}};
  CHECK_THROWS_AS(true_count_mass(small, counts), std::invalid_argument);
}

TEST_CASE("oracle natural spreads class mass over class members") {
  GroundTruth skew{{0.5, 0.3, 0.1, 0.1}};
  const TokenSequence seq = seq_of({0, 1, 0, 2}, 4);
  const CountTable counts(seq);
  const NaturalDistribution q = oracle_natural(skew, counts);
  REQUIRE(q.alphabet_known);
  CHECK(q.observed[0] == 0.5);  // alone in the count-2 class
  CHECK(q.observed[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(q.observed[2] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(q.unseen_count == 1);
  CHECK(q.unseen_each == 0.1);
  CHECK(q.unseen_lump == 0.0);

  // averaging inside classes moves |0.3-0.2| + |0.1-0.2| in symbol mass
  CHECK(tv_against_truth(skew, counts, q) == doctest::Approx(0.1).epsilon(1e-12));

  // under a uniform truth the oracle reproduces the law exactly
  GroundTruth uniform{{0.25, 0.25, 0.25, 0.25}};
  const NaturalDistribution u = oracle_natural(uniform, counts);
  CHECK(tv_against_truth(uniform, counts, u) <= 1e-15);
}

TEST_CASE("tv against truth rejects mismatched working alphabets") {
  GroundTruth truth{{0.5, 0.25, 0.25}};
  const TokenSequence seq = seq_of({0, 1, 0}, 3);
  const CountTable counts(seq);

  NaturalDistribution lump;  // alphabet never supplied
  lump.observed = {0.5, 0.5};
  CHECK_THROWS_AS(tv_against_truth(truth, counts, lump), std::invalid_argument);

  const CountMassVector m = true_count_mass(truth, counts);
  NaturalDistribution wrong = natural_from_count_mass(m, counts, 4);
  CHECK_THROWS_AS(tv_against_truth(truth, counts, wrong), std::invalid_argument);
}

TEST_CASE("risk rate curve") {
  CHECK(hybrid_risk_rate(1000000, 1) == doctest::Approx(0.3716922188849839).epsilon(1e-12));
  CHECK(hybrid_risk_rate(2, 1) == doctest::Approx(0.7417218358622215).epsilon(1e-12));

  // quadrupling the window doubles the rate exactly
  CHECK(hybrid_risk_rate(5000, 4) == 2.0 * hybrid_risk_rate(5000, 1));

  double last = hybrid_risk_rate(100, 1);
  for (std::uint64_t n : {1000, 10000, 100000, 1000000}) {
    const double r = hybrid_risk_rate(n, 1);
    CHECK(r < last);
    last = r;
  }

  CHECK_THROWS_AS(hybrid_risk_rate(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(hybrid_risk_rate(100, 0), std::invalid_argument);
}

TEST_CASE("plug-in error bound shape") {
  CHECK(plugin_error_bound(100, 1, 1, 10000, 0.1) ==
        doctest::Approx(0.003393070212207556).epsilon(1e-12));
  CHECK(plugin_error_bound(0, 1, 5, 100, 0.1) == 0.0);

  // quadrupling the count doubles the bound exactly
  CHECK(plugin_error_bound(400, 3, 7, 10000, 0.1) ==
        2.0 * plugin_error_bound(100, 3, 7, 10000, 0.1));

  CHECK_THROWS_AS(plugin_error_bound(1, 0, 1, 100, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(plugin_error_bound(1, 1, 1, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(plugin_error_bound(1, 1, 1, 100, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(plugin_error_bound(1, 1, 1, 100, 1.0), std::invalid_argument);
}

TEST_CASE("count threshold takes the larger of its two branches") {
  for (std::uint64_t tau0 : {1, 3, 10, 50}) {
    for (std::uint64_t n : {10, 1000, 100000}) {
      for (double delta : {0.5, 0.1, 0.01}) {
        const double dn = static_cast<double>(n), t0 = static_cast<double>(tau0);
        const double first = 36.0 * t0 * (std::log(22.0) + std::log(dn) - std::log(delta));
        const double l11 = std::log(11.0) + std::log(dn) - std::log(delta);
        const double second = 1.0 + std::sqrt((4.0 + 8.0 * t0) * l11) + 4.0 * t0 * l11 / 3.0;
        CHECK(plugin_bound_count_threshold(tau0, n, delta) ==
              doctest::Approx(std::max(first, second)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(plugin_bound_count_threshold(0, 100, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(plugin_bound_count_threshold(1, 100, 1.0), std::invalid_argument);
}

TEST_CASE("windowed error bound") {
  const std::vector<double> em{0.1, 0.2, 0.1};
  CHECK(wingit_error_bound(0, 1, 100, em) ==
        doctest::Approx(0.09639503235220041).epsilon(1e-12));

  // all expected masses zero leaves only the additive tail
  const std::vector<double> zeros(4 * 3 - 1, 0.0);
  CHECK(wingit_error_bound(2, 3, 100, zeros) == 3.0 * 3.0 / 100.0);

  // nondecreasing in the count at fixed masses
  double last = -1.0;
  for (std::uint64_t z : {0, 1, 2, 5, 20}) {
    const double b = wingit_error_bound(z, 1, 100, em);
    CHECK(b >= last);
    last = b;
  }

  CHECK_THROWS_AS(wingit_error_bound(0, 0, 100, em), std::invalid_argument);
  CHECK_THROWS_AS(wingit_error_bound(0, 1, 0, em), std::invalid_argument);
  const std::vector<double> wrong_len{0.1, 0.2};
  CHECK_THROWS_AS(wingit_error_bound(0, 1, 100, wrong_len), std::invalid_argument);
  CHECK_THROWS_AS(wingit_error_bound(0, 2, 100, em), std::invalid_argument);  // needs 7
  const std::vector<double> negative{0.1, -0.2, 0.1};
  CHECK_THROWS_AS(wingit_error_bound(0, 1, 100, negative), std::invalid_argument);
}

TEST_CASE("enumeration oracle reproduces the closed-form coin-flip risk") {
  auto model = ProcessModel::iid({0.5, 0.5});
  const double exact = exact_tv_risk(model, 3, [](const TokenSequence& s) {
    return plugin_vector(s);
  });
  CHECK(exact == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("sampled risk matches exact enumeration: plug-in, iid") {
  auto model = ProcessModel::iid({0.3, 0.7});
  const double exact = exact_tv_risk(model, 4, [](const TokenSequence& s) {
    return plugin_vector(s);
  });
  RiskSpec spec;
  spec.estimator = EstimatorKind::plugin;
  spec.n = 4;
  spec.reps = 20000;
  spec.seed = 11;
  auto report = tv_risk_monte_carlo(model, spec);
  REQUIRE(report.tv_se > 0.0);
  CHECK(std::fabs(report.tv_mean - exact) <= 4.0 * report.tv_se);
  CHECK(report.l1_mean == doctest::Approx(2.0 * report.tv_mean).epsilon(1e-12));
}

TEST_CASE("sampled risk matches exact enumeration: hybrid, markov") {
  auto model = ProcessModel::markov({{0.8, 0.2}, {0.4, 0.6}});
  const double exact = exact_tv_risk(model, 5, [](const TokenSequence& s) {
    return hybrid_estimate(s, {1, 1}).mass;
  });
  RiskSpec spec;
  spec.estimator = EstimatorKind::hybrid;
  spec.n = 5;
  spec.tau = 1;
  spec.zeta_bar = 1;
  spec.reps = 20000;
  spec.seed = 12;
  auto report = tv_risk_monte_carlo(model, spec);
  CHECK(std::fabs(report.tv_mean - exact) <= 4.0 * report.tv_se);
}

TEST_CASE("sampled risk matches exact enumeration: windowed, three symbols") {
  auto model = ProcessModel::iid({0.5, 0.25, 0.25});
  const double exact = exact_tv_risk(model, 6, [](const TokenSequence& s) {
    return wingit_vector(s, 2, 6);
  });
  RiskSpec spec;
  spec.estimator = EstimatorKind::wingit;
  spec.n = 6;
  spec.tau = 2;
  spec.reps = 20000;
  spec.seed = 13;
  auto report = tv_risk_monte_carlo(model, spec);
  CHECK(std::fabs(report.tv_mean - exact) <= 4.0 * report.tv_se);
}

TEST_CASE("risk evaluation is seed-deterministic and thread-invariant") {
  auto model = ProcessModel::markov({{0.9, 0.1}, {0.1, 0.9}});
  RiskSpec spec;
  spec.estimator = EstimatorKind::hybrid;
  spec.n = 300;
  spec.tau = 2;
  spec.zeta_bar = default_transition_point(300);
  spec.reps = 64;
  spec.seed = 99;
  spec.per_zeta = true;
  spec.threads = 1;
  auto a = tv_risk_monte_carlo(model, spec);
  spec.threads = 4;
  auto b = tv_risk_monte_carlo(model, spec);
  CHECK(a.tv_mean == b.tv_mean);
  CHECK(a.tv_se == b.tv_se);
  CHECK(a.l1_mean == b.l1_mean);
  CHECK(a.theory_rate == b.theory_rate);
  REQUIRE(a.per_zeta_mae.size() == b.per_zeta_mae.size());
  for (std::size_t z = 0; z < a.per_zeta_mae.size(); ++z)
    CHECK(a.per_zeta_mae[z] == b.per_zeta_mae[z]);
}

TEST_CASE("per-count errors cover the requested range and match a recount") {
  auto model = ProcessModel::iid({0.7, 0.1, 0.1, 0.1});
  RiskSpec spec;
  spec.estimator = EstimatorKind::hybrid;
  spec.n = 40;
  spec.tau = 1;
  spec.zeta_bar = 2;
  spec.reps = 50;
  spec.seed = 7;
  spec.per_zeta = true;
  auto report = tv_risk_monte_carlo(model, spec);
  REQUIRE(report.per_zeta_mae.size() == 3 * 2 + 1);  // counts 0..3*zeta_bar

  spec.per_zeta_full = true;
  auto full = tv_risk_monte_carlo(model, spec);
  REQUIRE(full.per_zeta_mae.size() == 41);
  for (std::size_t z = 0; z < report.per_zeta_mae.size(); ++z)
    CHECK(full.per_zeta_mae[z] == report.per_zeta_mae[z]);

  // recompute the per-count means from the per-replication views
  std::vector<std::vector<double>> abs_err(spec.reps);
  tv_risk_monte_carlo(model, spec, [&](const ReplicationView& view) {
    std::vector<double>& slot = abs_err[view.replication];
    slot.resize(41);
    for (std::size_t z = 0; z <= 40; ++z)
      slot[z] = std::fabs(view.estimate.mass[z] - view.truth.mass[z]);
  });
  for (std::size_t z = 0; z <= 40; ++z) {
    double acc = 0.0;
    for (const auto& rep : abs_err) acc += rep[z];
    CHECK(full.per_zeta_mae[z] ==
          doctest::Approx(acc / static_cast<double>(spec.reps)).epsilon(1e-13));
  }
}

TEST_CASE("replication views are self-consistent") {
  auto model = ProcessModel::markov({{0.8, 0.2}, {0.4, 0.6}});
  RiskSpec spec;
  spec.estimator = EstimatorKind::hybrid;
  spec.n = 120;
  spec.tau = 2;
  spec.zeta_bar = 3;
  spec.reps = 40;
  spec.seed = 3;
  std::vector<std::atomic<int>> seen(spec.reps);
  std::atomic<int> bad{0};
  tv_risk_monte_carlo(model, spec, [&](const ReplicationView& view) {
    seen[view.replication].fetch_add(1);
    if (view.tv != tv_distance(view.estimate, view.truth)) bad.fetch_add(1);
    if (view.l1 != l1_distance(view.estimate, view.truth)) bad.fetch_add(1);
    if (view.nu != view.unnormalized.sum()) bad.fetch_add(1);
    if (view.fallback) bad.fetch_add(1);
    if (view.seq.size() != spec.n) bad.fetch_add(1);
    if (view.counts.total() != spec.n) bad.fetch_add(1);
  });
  CHECK(bad.load() == 0);
  for (auto& s : seen) CHECK(s.load() == 1);
}

TEST_CASE("degenerate one-symbol process has zero plug-in risk") {
  auto model = ProcessModel::iid({1.0});
  RiskSpec spec;
  spec.estimator = EstimatorKind::plugin;
  spec.n = 5;
  spec.reps = 20;
  spec.seed = 1;
  auto report = tv_risk_monte_carlo(model, spec);
  CHECK(report.tv_mean == 0.0);
  CHECK(report.tv_se == 0.0);
  CHECK(report.l1_mean == 0.0);
}

TEST_CASE("triangle surrogate holds on every replication") {
  // d(pi, natural(estimate)) <= 2 d(pi, natural(truth)) + d(estimate, truth):
  // the oracle natural is the best count-measurable approximation up to a
  // factor of two, and switching class masses costs their count-mass gap.
  struct Setup {
    ProcessModel model;
    std::uint64_t n;
    EstimatorKind kind;
  };
  const Setup setups[] = {
      {ProcessModel::markov({{0.8, 0.2}, {0.4, 0.6}}), 200, EstimatorKind::hybrid},
      {ProcessModel::iid({0.7, 0.1, 0.1, 0.1}), 30, EstimatorKind::plugin},
      {ProcessModel::iid({0.5, 0.25, 0.25}), 60, EstimatorKind::wingit},
  };
  for (const auto& setup : setups) {
    const GroundTruth truth{setup.model.stationary()};
    const std::uint64_t alphabet = setup.model.alphabet_size();
    RiskSpec spec;
    spec.estimator = setup.kind;
    spec.n = setup.n;
    spec.tau = 2;
    spec.zeta_bar = default_transition_point(setup.n);
    spec.reps = 100;
    spec.seed = 4242;
    std::atomic<int> violations{0};
    tv_risk_monte_carlo(setup.model, spec, [&](const ReplicationView& view) {
      const NaturalDistribution fitted =
          natural_from_count_mass(view.estimate, view.counts, alphabet);
      const NaturalDistribution oracle = oracle_natural(truth, view.counts);
      const double lhs = tv_against_truth(truth, view.counts, fitted);
      const double rhs = 2.0 * tv_against_truth(truth, view.counts, oracle) + view.tv;
      if (lhs > rhs + 1e-12) violations.fetch_add(1);
    });
    CHECK(violations.load() == 0);
  }
}

TEST_CASE("plug-in deviations respect the bound shape above the count threshold") {
  // 2-state chain with second eigenvalue 0.1: the mixing proxy at 1e-10
  // certifies 10 steps, and both symbols land near count n/2, above the
  // threshold. The constant-free bound then dominates the observed
  // deviations by an order of magnitude, so violations should be rare even
  // though the theory only promises frequency delta.
  auto model = ProcessModel::markov({{0.55, 0.45}, {0.45, 0.55}});
  const std::uint64_t n = 10000;
  const double delta = 0.5, eps = 0.01;
  const std::uint64_t tau0 =
      model.mixing_time(eps / (static_cast<double>(n) * static_cast<double>(n)));
  CHECK(tau0 == 10);
  const double threshold = plugin_bound_count_threshold(tau0, n, delta);
  CHECK(threshold < 5000.0);  // typical counts clear it

  RiskSpec spec;
  spec.estimator = EstimatorKind::plugin;
  spec.n = n;
  spec.reps = 200;
  spec.seed = 20260822;
  std::atomic<int> violations{0};
  std::atomic<int> checked{0};
  tv_risk_monte_carlo(model, spec, [&](const ReplicationView& view) {
    const FrequencyProfile prof = frequency_profile(view.counts);
    bool ok = true;
    bool any = false;
    for (std::uint64_t z = static_cast<std::uint64_t>(threshold) + 1; z <= n; ++z) {
      if (prof.phi[z] == 0) continue;
      any = true;
      const double bound = plugin_error_bound(z, tau0, prof.phi[z], n, delta);
      if (std::fabs(view.estimate.mass[z] - view.truth.mass[z]) > bound) ok = false;
    }
    if (any) checked.fetch_add(1);
    if (!ok) violations.fetch_add(1);
  });
  CHECK(checked.load() == 200);
  CHECK(static_cast<double>(violations.load()) <=
        delta * static_cast<double>(spec.reps));
}

TEST_CASE("risk evaluation rejects malformed requests") {
  auto model = ProcessModel::iid({0.5, 0.5});
  RiskSpec spec;
  spec.n = 10;
  spec.reps = 1;

  RiskSpec bad = spec;
  bad.n = 1;
  CHECK_THROWS_AS(tv_risk_monte_carlo(model, bad), std::invalid_argument);
  bad = spec;
  bad.reps = 0;
  CHECK_THROWS_AS(tv_risk_monte_carlo(model, bad), std::invalid_argument);
  bad = spec;
  bad.tau = 0;
  CHECK_THROWS_AS(tv_risk_monte_carlo(model, bad), std::invalid_argument);
  bad = spec;
  bad.tau = 11;
  CHECK_THROWS_AS(tv_risk_monte_carlo(model, bad), std::invalid_argument);
  bad = spec;
  bad.zeta_bar = 11;
  CHECK_THROWS_AS(tv_risk_monte_carlo(model, bad), std::invalid_argument);
}
