#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "belllab/analysis.hpp"
#include "belllab/pipeline.hpp"

using namespace belllab;

namespace {

RawEventStream stream(Station st, std::vector<std::int64_t> times, std::uint8_t setting = 0) {
  RawEventStream s{st, {}, {}};
  for (auto t : times) {
    s.events.push_back({t, setting, Outcome::kPlus});
    s.setting_log.push_back({t, setting});
  }
  return s;
}

// Largest matching with |dt| <= w, ties broken by smallest total |dt|.
std::vector<std::pair<std::int64_t, std::int64_t>> best_matching(const std::vector<std::int64_t>& a,
                                                                 const std::vector<std::int64_t>& b,
                                                                 std::int64_t w) {
  std::vector<std::pair<std::int64_t, std::int64_t>> best, cur;
  std::size_t best_n = 0;
  std::int64_t best_cost = 0;
  std::vector<bool> used(b.size(), false);
  auto rec = [&](auto&& self, std::size_t i, std::int64_t cost) -> void {
    if (i == a.size()) {
      if (cur.size() > best_n || (cur.size() == best_n && cost < best_cost)) {
        best = cur;
        best_n = cur.size();
        best_cost = cost;
      }
      return;
    }
    self(self, i + 1, cost);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j] || std::abs(a[i] - b[j]) > w) continue;
      used[j] = true;
      cur.push_back({a[i], b[j]});
      self(self, i + 1, cost + std::abs(a[i] - b[j]));
      cur.pop_back();
      used[j] = false;
    }
  };
  rec(rec, 0, 0);
  std::sort(best.begin(), best.end());
  return best;
}

SourceProtocolConfig delay_fixture() {
  SourceProtocolConfig c;
  c.pair_rate = 100000;
  c.duration = 1.0;
  c.jitter_sd = 1.0;
  c.setting_delay[1] = {0, 6};
  c.detector_delay[0] = {6, 0};
  c.detector_delay[1] = {0, 3};
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("identical time tags pair completely") {
  const std::vector<std::int64_t> t{10, 50, 90, 130};
  for (auto strategy : {MatchStrategy::kFixedLattice, MatchStrategy::kGreedyNearest})
    for (std::int64_t w : {1, 7, 30}) {
      const auto r = match_coincidences(stream(Station::kA, t), stream(Station::kB, t), {w, strategy});
      CHECK(r.audit.pairs == 4);
      CHECK(r.audit.dropped_a + r.audit.dropped_b == 0);
      CHECK(r.audit.one_sided_a + r.audit.one_sided_b == 0);
      CHECK(r.audit.conserved());
    }
}

TEST_CASE("disjoint supports never pair") {
  for (auto strategy : {MatchStrategy::kFixedLattice, MatchStrategy::kGreedyNearest}) {
    const auto r = match_coincidences(stream(Station::kA, {0, 10, 20}), stream(Station::kB, {100, 110}),
                                      {5, strategy});
    CHECK(r.audit.pairs == 0);
    CHECK(r.audit.one_sided_a == 3);
    CHECK(r.audit.one_sided_b == 2);
    CHECK(r.pairs.size() == 5);
  }
}

TEST_CASE("six-event fixture with W = 2") {
  // Each click has a distinct (setting, outcome) signature so pairs can be identified.
  const std::vector<std::int64_t> ta{0, 3, 10}, tb{2, 4, 11};
  const std::vector<std::pair<std::uint8_t, Outcome>> sig_a{
      {0, Outcome::kPlus}, {1, Outcome::kPlus}, {0, Outcome::kMinus}};
  const std::vector<std::pair<std::uint8_t, Outcome>> sig_b{
      {0, Outcome::kPlus}, {1, Outcome::kMinus}, {1, Outcome::kPlus}};
  RawEventStream a{Station::kA, {}, {}}, b{Station::kB, {}, {}};
  for (std::size_t i = 0; i < 3; ++i) {
    a.events.push_back({ta[i], sig_a[i].first, sig_a[i].second});
    a.setting_log.push_back({ta[i], sig_a[i].first});
    b.events.push_back({tb[i], sig_b[i].first, sig_b[i].second});
    b.setting_log.push_back({tb[i], sig_b[i].first});
  }
  auto index_of = [](const std::vector<std::int64_t>& t, std::int64_t v) {
    return static_cast<std::size_t>(std::find(t.begin(), t.end(), v) - t.begin());
  };
  auto as_pair = [&](std::int64_t at, std::int64_t bt) {
    const auto& sa = sig_a[index_of(ta, at)];
    const auto& sb = sig_b[index_of(tb, bt)];
    return RawPair{{sa.first, sb.first}, sa.second, sb.second, std::min(at, bt)};
  };
  auto two_sided = [](const PairedRawData& pairs) {
    PairedRawData out;
    for (const auto& p : pairs)
      if (p.a != Outcome::kNone && p.b != Outcome::kNone) out.push_back(p);
    return out;
  };

  SUBCASE("greedy pairing equals the exhaustive optimum") {
    const auto expected = best_matching(ta, tb, 2);
    REQUIRE(expected == std::vector<std::pair<std::int64_t, std::int64_t>>{{0, 2}, {3, 4}, {10, 11}});
    PairedRawData want;
    for (const auto& [at, bt] : expected) want.push_back(as_pair(at, bt));
    const auto r = match_coincidences(a, b, {2, MatchStrategy::kGreedyNearest});
    CHECK(two_sided(r.pairs) == want);
    CHECK(r.audit.one_sided_a == 0);
    CHECK(r.audit.one_sided_b == 0);
  }
  SUBCASE("fixed lattice bins [2k, 2k + 2)") {
    // bins: [0,2) A0 | [2,4) A3 B2 | [4,6) B4 | [10,12) A10 B11
    const auto r = match_coincidences(a, b, {2, MatchStrategy::kFixedLattice});
    CHECK(two_sided(r.pairs) == PairedRawData{as_pair(3, 2), as_pair(10, 11)});
    CHECK(r.audit.one_sided_a == 1);
    CHECK(r.audit.one_sided_b == 1);
    REQUIRE(r.pairs.size() == 4);
    // A0 alone: remote setting read from B's log (first entry, label 0)
    CHECK(r.pairs[0] == RawPair{{0, 0}, Outcome::kPlus, Outcome::kNone, 0});
    // B4 alone: A's log has label 1 in force since t = 3
    CHECK(r.pairs[2] == RawPair{{1, 1}, Outcome::kNone, Outcome::kMinus, 4});
  }
}

TEST_CASE("greedy ties go to the earlier B click") {
  RawEventStream a{Station::kA, {{5, 0, Outcome::kPlus}}, {{5, 0}}};
  RawEventStream b{Station::kB, {{4, 0, Outcome::kMinus}, {6, 1, Outcome::kPlus}}, {{4, 0}, {6, 1}}};
  const auto r = match_coincidences(a, b, {1, MatchStrategy::kGreedyNearest});
  CHECK(r.audit.pairs == 1);
  REQUIRE(r.audit.one_sided_b == 1);
  bool found = false;
  for (const auto& p : r.pairs)
    if (p.a != Outcome::kNone && p.b != Outcome::kNone) {
      CHECK(p.b == Outcome::kMinus);
      found = true;
    }
  CHECK(found);
}

TEST_CASE("lattice keeps the earliest click per station and counts the rest") {
  const auto r = match_coincidences(stream(Station::kA, {0, 1, 2}), stream(Station::kB, {1}),
                                    {10, MatchStrategy::kFixedLattice});
  CHECK(r.audit.pairs == 1);
  CHECK(r.audit.dropped_a == 2);
  CHECK(r.audit.conserved());
}

TEST_CASE("one-sided slots without a remote log are unattributed") {
  RawEventStream a{Station::kA, {{0, 1, Outcome::kMinus}}, {}};
  RawEventStream b{Station::kB, {{50, 0, Outcome::kPlus}}, {}};
  const auto r = match_coincidences(a, b, {5, MatchStrategy::kFixedLattice});
  CHECK(r.audit.unattributed_a == 1);
  CHECK(r.audit.unattributed_b == 1);
  CHECK(r.pairs.empty());
  CHECK(r.audit.conserved());
}

TEST_CASE("unsorted streams are rejected") {
  RawEventStream a{Station::kA, {{5, 0, Outcome::kPlus}, {3, 0, Outcome::kPlus}}, {}};
  CHECK_THROWS_AS(match_coincidences(a, stream(Station::kB, {1}), {2, MatchStrategy::kFixedLattice}),
                  InputError);
  CHECK_THROWS_AS(CoincidencePolicy({0, MatchStrategy::kFixedLattice}).validate(), InputError);
  CHECK_THROWS_AS(match_strategy_from_string("sliding"), InputError);
  CHECK(match_strategy_from_string(to_string(MatchStrategy::kGreedyNearest)) == MatchStrategy::kGreedyNearest);
}

TEST_CASE("postselect") {
  const SettingPair s{0, 1};
  SUBCASE("no zeros") {
    std::vector<RawPair> in(5, RawPair{s, Outcome::kPlus, Outcome::kMinus, 0});
    const auto ps = postselect(in);
    CHECK(ps.retained == in);
    CHECK(*ps.retention[s.index()] == 1.0);
    CHECK_FALSE(ps.retention[0].has_value());
  }
  SUBCASE("all A outcomes zero") {
    std::vector<RawPair> in(5, RawPair{s, Outcome::kNone, Outcome::kMinus, 0});
    const auto ps = postselect(in);
    CHECK(ps.retained.empty());
    CHECK(*ps.retention[s.index()] == 0.0);
  }
  SUBCASE("ten pairs, four with a zero") {
    std::vector<RawPair> in;
    for (int i = 0; i < 6; ++i) in.push_back({s, Outcome::kPlus, i % 2 ? Outcome::kPlus : Outcome::kMinus, i});
    in.push_back({s, Outcome::kNone, Outcome::kPlus, 6});
    in.push_back({s, Outcome::kMinus, Outcome::kNone, 7});
    in.push_back({s, Outcome::kNone, Outcome::kMinus, 8});
    in.push_back({s, Outcome::kPlus, Outcome::kNone, 9});
    const auto ps = postselect(in);
    CHECK(ps.retained.size() == 6);
    CHECK(ps.kept[s.index()] == 6);
    CHECK(ps.total[s.index()] == 10);
    CHECK(*ps.retention[s.index()] == doctest::Approx(0.6));
  }
}

TEST_CASE("single counts use every click and the remote log") {
  RawEventStream a{Station::kA, {{10, 0, Outcome::kPlus}, {30, 1, Outcome::kMinus}}, {{0, 0}, {25, 1}}};
  RawEventStream b{Station::kB, {{12, 1, Outcome::kPlus}}, {{0, 1}, {28, 0}}};
  const auto sc = single_counts(a, b);
  CHECK(sc.table.count({0, 1}, Outcome::kPlus, Outcome::kNone) == 1);   // A at 10, B setting 1
  CHECK(sc.table.count({1, 0}, Outcome::kMinus, Outcome::kNone) == 1);  // A at 30, B setting 0
  CHECK(sc.table.count({0, 1}, Outcome::kNone, Outcome::kPlus) == 1);   // B at 12, A setting 0
  CHECK(sc.table.total() == 3);
  CHECK(sc.unattributed == 0);
}

TEST_CASE("greedy sweep saturates to the unwindowed value on lossless streams") {
  SourceProtocolConfig c;
  c.pair_rate = 4000;
  c.duration = 1.0;
  const auto run = run_source_experiment(c, QuantumSingletModel(AngleAssignment::canonical(), 1.0), 8);
  REQUIRE(run.a.events.size() == run.b.events.size());
  ContextTable direct;
  for (std::size_t i = 0; i < run.a.events.size(); ++i)
    direct.add({run.a.events[i].setting, run.b.events[i].setting}, run.a.events[i].outcome,
               run.b.events[i].outcome);
  const std::vector<std::int64_t> w{3'000'000'000};
  const auto rows = window_sweep(run.a, run.b, w, MatchStrategy::kGreedyNearest);
  REQUIRE(rows[0].chsh.has_value());
  CHECK(*rows[0].chsh == *chsh(estimate(direct)));
}

TEST_CASE("tiny windows starve jittered streams") {
  SourceProtocolConfig c;
  c.pair_rate = 200;
  c.duration = 1.0;
  c.jitter_sd = 1e5;
  const auto run = run_source_experiment(c, QuantumSingletModel(AngleAssignment::canonical(), 1.0), 8);
  const std::vector<std::int64_t> w{1};
  const auto rows = window_sweep(run.a, run.b, w);
  CHECK_FALSE(rows[0].chsh.has_value());
  for (auto s : kAllContexts) CHECK_FALSE(rows[0].summary[s].e_ab.has_value());
}

TEST_CASE("window sweep on the delay fixture") {
  const auto run = run_source_experiment(delay_fixture(), make_pearle_like(AngleAssignment::canonical()), 101);
  auto direct_s = [&](std::int64_t w) {
    const auto m = match_coincidences(run.a, run.b, {w, MatchStrategy::kFixedLattice});
    return *chsh(estimate(tally(postselect(m.pairs).retained)));
  };
  const std::vector<std::int64_t> w{6, 100};
  const auto rows = window_sweep(run.a, run.b, w);
  CHECK(*rows[0].chsh == doctest::Approx(direct_s(6)).epsilon(1e-15));
  CHECK(*rows[1].chsh == doctest::Approx(direct_s(100)).epsilon(1e-15));
  CHECK(std::abs(*rows[0].chsh - *rows[1].chsh) > 0.1);
  for (const auto& r : rows) CHECK(r.audit.conserved());
}

TEST_CASE("window sweep is independent of the worker count") {
  const auto run = run_source_experiment(delay_fixture(), make_pearle_like(AngleAssignment::canonical()), 5);
  const std::vector<std::int64_t> w{2, 5, 9, 20, 40};
  setenv("BELLLAB_THREADS", "1", 1);
  const auto one = window_sweep(run.a, run.b, w);
  setenv("BELLLAB_THREADS", "3", 1);
  const auto three = window_sweep(run.a, run.b, w);
  unsetenv("BELLLAB_THREADS");
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(one[i].chsh == three[i].chsh);
}

}  // TEST_SUITE
