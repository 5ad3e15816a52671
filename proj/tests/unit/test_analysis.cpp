#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "belllab/analysis.hpp"
#include "belllab/protocol.hpp"
#include "belllab/simplex.hpp"

using namespace belllab;

namespace {

constexpr double kPi = std::numbers::pi;

DeterministicLhvModel random_lhv(RngStream& rng, std::size_t n_hidden) {
  std::vector<double> w(n_hidden);
  double mass = 0;
  for (auto& v : w) mass += v = rng.uniform() + 1e-3;
  for (auto& v : w) v /= mass;
  std::array<std::vector<int>, 2> a, b;
  for (int label = 0; label < 2; ++label)
    for (std::size_t l = 0; l < n_hidden; ++l) {
      a[label].push_back(rng.uniform() < 0.5 ? 1 : -1);
      b[label].push_back(rng.uniform() < 0.5 ? 1 : -1);
    }
  return DeterministicLhvModel(w, a, b);
}

// A no-signalling table with random marginals and random correlations
// inside the positivity range.
PairwiseTables random_ns_table(RngStream& rng) {
  const std::array<double, 2> ma{2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
  const std::array<double, 2> mb{2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
  PairwiseTables p{};
  for (auto s : kAllContexts) {
    const double x = ma[s.x], y = mb[s.y];
    const double lo = -1 + std::abs(x + y);
    const double hi = 1 - std::abs(x - y);
    const double e = lo + (hi - lo) * rng.uniform();
    p[s.index()] = {(1 + x + y + e) / 4, (1 + x - y - e) / 4, (1 - x + y - e) / 4, (1 - x - y + e) / 4};
  }
  return p;
}

// Fine: a no-signalling table has a joint law iff all 8 CHSH expressions are <= 2.
bool fine_feasible(const PairwiseTables& p) {
  std::array<double, 4> e{};
  for (std::size_t k = 0; k < 4; ++k) e[k] = p[k][0] - p[k][1] - p[k][2] + p[k][3];
  for (int minus = 0; minus < 4; ++minus) {
    double s = 0;
    for (int k = 0; k < 4; ++k) s += k == minus ? -e[k] : e[k];
    if (std::abs(s) > 2) return false;
  }
  return true;
}

PairwiseTables singlet_table() {
  return pairwise_tables(QuantumSingletModel(AngleAssignment::canonical(), 1.0));
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("hoeffding p-values") {
  CHECK(hoeffding_pvalue(2.0, 1) == 1.0);
  CHECK(hoeffding_pvalue(2.0, 1000000) == 1.0);
  CHECK(hoeffding_pvalue(1.5, 100) == 1.0);
  CHECK(hoeffding_pvalue(2.5, 10000) == doctest::Approx(std::exp(-78.125)).epsilon(1e-12));
  // monotone in s_hat and n
  CHECK(hoeffding_pvalue(2.3, 1000) > hoeffding_pvalue(2.4, 1000));
  CHECK(hoeffding_pvalue(2.3, 1000) > hoeffding_pvalue(2.3, 2000));
}

TEST_CASE("lhv_pvalue scores the data per trial") {
  const auto trials = run_model_trials(QuantumSingletModel(AngleAssignment::canonical(), 1.0), 40000, 3);
  double score = 0;
  for (const auto& t : trials) score += 4.0 * chsh_sign(t.settings) * to_int(t.a) * to_int(t.b);
  const auto summary = estimate(tally(trials));
  const auto fixed = lhv_pvalue(summary);
  CHECK(fixed.s_hat == doctest::Approx(score / trials.size()).epsilon(1e-12));
  CHECK(fixed.p_value == 1.0);  // S is negative at canonical angles
  const auto best = lhv_pvalue_best_variant(summary);
  CHECK(best.variant.sign == -1);
  CHECK(best.variant.minus_context == 3);
  CHECK(best.s_hat == doctest::Approx(-fixed.s_hat));
  CHECK(best.p_value == doctest::Approx(std::min(1.0, 8 * hoeffding_pvalue(best.s_hat, best.n))));
}

TEST_CASE("lhv_pvalue on local data is 1 in the typical case") {
  // Even mixture of (A0, A1, B0, B1) = (+, +, +, +) and (-, +, +, +): exact S = 0.
  const DeterministicLhvModel m({0.5, 0.5}, {std::vector<int>{1, -1}, {1, 1}},
                                {std::vector<int>{1, 1}, {1, 1}});
  CHECK(*exact_chsh(m) == 0.0);
  const auto r = lhv_pvalue(estimate(tally(run_model_trials(m, 10000, 1))));
  CHECK(std::abs(r.s_hat) < 0.2);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("lhv_pvalue refuses starved or non-uniform data") {
  ContextTable t;
  t.add({0, 0}, Outcome::kPlus, Outcome::kPlus, 10);
  CHECK_THROWS_AS(lhv_pvalue(estimate(t)), InputError);
  for (auto s : kAllContexts) t.add(s, Outcome::kPlus, Outcome::kMinus, s.index() == 0 ? 100000 : 10);
  CHECK_THROWS_AS(lhv_pvalue(estimate(t)), InputError);
}

TEST_CASE("two-proportion test") {
  const auto same = *two_proportion_test(500, 1000, 500, 1000);
  CHECK(same.z == 0.0);
  CHECK(same.p_value == 1.0);
  const auto t = *two_proportion_test(6000, 10000, 5000, 10000);
  const double se = std::sqrt(0.55 * 0.45 * 2e-4);
  CHECK(t.std_error == doctest::Approx(se));
  CHECK(t.z == doctest::Approx(0.1 / se));
  CHECK(t.z == doctest::Approx(14.21).epsilon(1e-3));
  CHECK(t.p_value < 1e-6);
  CHECK_FALSE(two_proportion_test(1, 0, 1, 10).has_value());
  const auto degenerate = *two_proportion_test(10, 10, 20, 20);
  CHECK(degenerate.p_value == 1.0);
}

TEST_CASE("no-signalling report on matching marginals") {
  ContextTable t;
  for (auto s : kAllContexts) {
    t.add(s, Outcome::kPlus, Outcome::kMinus, 300);
    t.add(s, Outcome::kMinus, Outcome::kPlus, 300);
  }
  const auto report = nosignalling_test(t, t);
  REQUIRE(report.raw.comparisons.size() == 4);
  for (const auto& c : report.final_data.comparisons) {
    REQUIRE(c.test.has_value());
    CHECK(c.test->z == 0.0);
  }
  CHECK(*report.raw.block_p == 1.0);
}

TEST_CASE("no-signalling report detects a shifted marginal") {
  ContextTable t;
  for (auto s : kAllContexts) {
    const std::uint64_t plus = (s.x == 0 && s.y == 1) ? 6000 : 5000;
    t.add(s, Outcome::kPlus, Outcome::kPlus, plus);
    t.add(s, Outcome::kMinus, Outcome::kPlus, 10000 - plus);
  }
  const auto block = marginal_tests(t);
  CHECK(*block.block_p < 1e-6);
  for (const auto& c : block.comparisons)
    if (c.party == 'A' && c.local_setting == 0) CHECK(std::abs(c.test->z) == doctest::Approx(14.21).epsilon(1e-3));
}

TEST_CASE("phase-one simplex") {
  // x + y = 1, x - y = 0.5 -> (0.75, 0.25)
  const auto ok = solve_feasibility({1, 1, 1, -1}, 2, {1, 0.5});
  REQUIRE(ok.feasible);
  CHECK(ok.point[0] == doctest::Approx(0.75));
  CHECK(ok.point[1] == doctest::Approx(0.25));
  // x + y = 1, x + y = 2 has no solution
  const std::vector<double> a{1, 1, 1, 1}, b{1, 2};
  const auto bad = solve_feasibility(a, 2, b);
  REQUIRE_FALSE(bad.feasible);
  double yb = 0;
  for (std::size_t i = 0; i < 2; ++i) yb += bad.farkas[i] * b[i];
  CHECK(yb > 0);
  for (std::size_t j = 0; j < 2; ++j) CHECK(bad.farkas[0] * a[j] + bad.farkas[1] * a[2 + j] <= 1e-12);
}

TEST_CASE("feasibility: uniform product tables") {
  PairwiseTables p{};
  for (auto& row : p) row = {0.25, 0.25, 0.25, 0.25};
  const auto r = coupling_feasibility(p);
  REQUIRE(r.feasible);
  CHECK(r.witness_error < 1e-12);
}

TEST_CASE("feasibility: singlet tables are infeasible with a CHSH certificate") {
  const auto r = coupling_feasibility(singlet_table());
  REQUIRE_FALSE(r.feasible);
  REQUIRE(r.max_violation.has_value());
  CHECK(r.max_violation->slack() >= 2 * std::sqrt(2.0) - 2 - 1e-9);
  REQUIRE(r.farkas.has_value());
  CHECK(r.farkas->slack() > 0);
  // The certificate separates: value above its own vertex bound.
  CHECK(vertex_bound(r.max_violation->coefficients) == doctest::Approx(2.0));
}

TEST_CASE("feasibility: local models always have a witness") {
  RngStream rng(55, 0);
  for (int i = 0; i < 50; ++i) {
    const auto m = random_lhv(rng, 1 + i % 6);
    const auto r = coupling_feasibility(pairwise_tables(m));
    REQUIRE(r.feasible);
    CHECK(r.witness_error < 1e-9);
  }
}

TEST_CASE("feasibility agrees with the CHSH inequalities on no-signalling tables") {
  RngStream rng(56, 0);
  int infeasible = 0;
  for (int i = 0; i < 300; ++i) {
    const auto p = random_ns_table(rng);
    const bool fine = fine_feasible(p);
    CHECK(coupling_feasibility(p).feasible == fine);
    infeasible += !fine;
  }
  CHECK(infeasible > 0);
}

TEST_CASE("feasibility: signalling tables are infeasible") {
  PairwiseTables p{};
  for (auto& row : p) row = {0.25, 0.25, 0.25, 0.25};
  p[1] = {0.5, 0.5, 0.0, 0.0};  // A0 always +1 in context 01 only
  const auto r = coupling_feasibility(p);
  CHECK_FALSE(r.feasible);
  CHECK(r.max_violation->slack() > 0);
}

TEST_CASE("feasibility rejects non-distributions") {
  PairwiseTables p{};
  for (auto& row : p) row = {0.25, 0.25, 0.25, 0.25};
  p[2][0] = 0.5;
  CHECK_THROWS_AS(coupling_feasibility(p), InputError);
  p[2] = {-0.1, 0.6, 0.25, 0.25};
  CHECK_THROWS_AS(coupling_feasibility(p), InputError);
}

TEST_CASE("empirical pairwise tables") {
  ContextTable t;
  for (auto s : kAllContexts) {
    t.add(s, Outcome::kPlus, Outcome::kPlus, 1);
    t.add(s, Outcome::kMinus, Outcome::kMinus, 3);
    t.add(s, Outcome::kNone, Outcome::kMinus, 7);
  }
  const auto p = pairwise_tables(t);
  CHECK(p[0][0] == 0.25);
  CHECK(p[0][3] == 0.75);
}

TEST_CASE("exact theta sweep reproduces the cosine") {
  const std::vector<double> grid{0.0, kPi / 2, kPi};
  const auto pts = theta_sweep(singlet_family(1.0), grid, SweepMode::kExact, 0, 1);
  CHECK(*pts[0].e == -1.0);
  CHECK(std::abs(*pts[1].e) < 1e-15);
  CHECK(*pts[2].e == 1.0);
}

TEST_CASE("Monte-Carlo sweep: amplitude fit") {
  std::vector<double> grid;
  for (int i = 0; i < 16; ++i) grid.push_back(2 * kPi * i / 16);
  const auto pts = theta_sweep(singlet_family(0.7335), grid, SweepMode::kMonteCarlo, 100000, 4);
  CHECK(fit_cosine_amplitude(pts) == doctest::Approx(0.7335).epsilon(0.01 / 0.7335));
}

TEST_CASE("post-selection sweep equals single-point pipeline runs") {
  PearleOptions opts;
  opts.hidden_bins = 180;
  opts.instrument_bins = 50;
  const std::vector<double> grid{0.1, 0.9, 2.0};
  const auto pts = theta_sweep(pearle_family(opts), grid, SweepMode::kMonteCarlo, 20000, 9);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CouplingModel m = make_pearle_like({{grid[i], grid[i]}, {0.0, 0.0}}, opts);
    RngStream rng(9, stream_id(StreamKind::kSweep, i));
    std::vector<TrialRecord> trials;
    for (std::uint64_t k = 0; k < 20000; ++k) {
      const auto [a, b] = sample_trial(m, {0, 0}, rng);
      trials.push_back({k, {0, 0}, a, b, true});
    }
    std::vector<TrialRecord> kept;
    for (const auto& t : trials)
      if (t.a != Outcome::kNone && t.b != Outcome::kNone) kept.push_back(t);
    const auto e = estimate(tally(kept))[SettingPair{0, 0}];
    CHECK(*pts[i].e == *e.e_ab);
    CHECK(pts[i].n == e.n_pairs);
  }
}

TEST_CASE("sweeps reject an empty grid") {
  CHECK_THROWS_AS(theta_sweep(singlet_family(1.0), std::vector<double>{}, SweepMode::kExact, 0, 1),
                  InputError);
}

TEST_CASE("random angle assignments never beat the Tsirelson bound") {
  RngStream rng(12, 0);
  for (int i = 0; i < 2000; ++i) {
    AngleAssignment a{{2 * kPi * rng.uniform(), 2 * kPi * rng.uniform()},
                      {2 * kPi * rng.uniform(), 2 * kPi * rng.uniform()}};
    CHECK(std::abs(*exact_chsh(QuantumSingletModel(a, 1.0))) <= kTsirelson + 1e-9);
  }
}

}  // TEST_SUITE
