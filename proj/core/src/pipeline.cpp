#include "belllab/pipeline.hpp"

#include <algorithm>
#include <cstdlib>

#include "belllab/parallel.hpp"

namespace belllab {
namespace {

std::int64_t floor_div(std::int64_t t, std::int64_t w) {
  std::int64_t q = t / w;
  if ((t % w != 0) && ((t < 0) != (w < 0))) --q;
  return q;
}

struct Slot {
  RawPair pair;
  bool attributed = true;
};

MatchResult finish(std::vector<Slot>& slots, MatchAudit audit) {
  std::stable_sort(slots.begin(), slots.end(),
                   [](const Slot& l, const Slot& r) { return l.pair.time_ns < r.pair.time_ns; });
  MatchResult out;
  out.pairs.reserve(slots.size());
  for (const auto& s : slots)
    if (s.attributed) out.pairs.push_back(s.pair);
  out.audit = audit;
  if (!out.audit.conserved()) throw InvariantError("coincidence matching lost or duplicated events");
  return out;
}

// One-sided slot for a lone click; the remote setting comes from the remote log.
void add_one_sided(std::vector<Slot>& slots, MatchAudit& audit, const TimeTag& e,
                   const RawEventStream& remote, bool is_a) {
  const auto remote_setting = remote.setting_at(e.time_ns);
  if (!remote_setting) {
    (is_a ? audit.unattributed_a : audit.unattributed_b)++;
    return;
  }
  RawPair p;
  p.time_ns = e.time_ns;
  if (is_a) {
    p.settings = {e.setting, *remote_setting};
    p.a = e.outcome;
    ++audit.one_sided_a;
  } else {
    p.settings = {*remote_setting, e.setting};
    p.b = e.outcome;
    ++audit.one_sided_b;
  }
  slots.push_back({p, true});
}

MatchResult match_lattice(const RawEventStream& a, const RawEventStream& b, std::int64_t w) {
  MatchAudit audit{a.events.size(), b.events.size()};
  std::vector<Slot> slots;
  const auto& ea = a.events;
  const auto& eb = b.events;
  std::size_t i = 0, j = 0;
  while (i < ea.size() || j < eb.size()) {
    const std::int64_t ka = i < ea.size() ? floor_div(ea[i].time_ns, w) : INT64_MAX;
    const std::int64_t kb = j < eb.size() ? floor_div(eb[j].time_ns, w) : INT64_MAX;
    const std::int64_t k = std::min(ka, kb);
    std::size_t ia = i, jb = j;
    while (ia < ea.size() && floor_div(ea[ia].time_ns, w) == k) ++ia;
    while (jb < eb.size() && floor_div(eb[jb].time_ns, w) == k) ++jb;
    const std::size_t na = ia - i, nb = jb - j;
    if (na > 0 && nb > 0) {
      RawPair p{{ea[i].setting, eb[j].setting}, ea[i].outcome, eb[j].outcome,
                std::min(ea[i].time_ns, eb[j].time_ns)};
      slots.push_back({p, true});
      ++audit.pairs;
    } else if (na > 0) {
      add_one_sided(slots, audit, ea[i], b, true);
    } else {
      add_one_sided(slots, audit, eb[j], a, false);
    }
    if (na > 1) audit.dropped_a += na - 1;
    if (nb > 1) audit.dropped_b += nb - 1;
    i = ia;
    j = jb;
  }
  return finish(slots, audit);
}

MatchResult match_greedy(const RawEventStream& a, const RawEventStream& b, std::int64_t w) {
  MatchAudit audit{a.events.size(), b.events.size()};
  std::vector<Slot> slots;
  const auto& ea = a.events;
  const auto& eb = b.events;
  std::vector<bool> used(eb.size(), false);
  std::size_t lo = 0;
  for (const auto& e : ea) {
    while (lo < eb.size() && eb[lo].time_ns < e.time_ns - w) ++lo;
    std::size_t best = eb.size();
    std::int64_t best_gap = 0;
    for (std::size_t k = lo; k < eb.size() && eb[k].time_ns <= e.time_ns + w; ++k) {
      if (used[k]) continue;
      const std::int64_t gap = std::llabs(eb[k].time_ns - e.time_ns);
      if (best == eb.size() || gap < best_gap) {
        best = k;
        best_gap = gap;
      }
    }
    if (best == eb.size()) {
      add_one_sided(slots, audit, e, b, true);
      continue;
    }
    used[best] = true;
    RawPair p{{e.setting, eb[best].setting}, e.outcome, eb[best].outcome,
              std::min(e.time_ns, eb[best].time_ns)};
    slots.push_back({p, true});
    ++audit.pairs;
  }
  for (std::size_t k = 0; k < eb.size(); ++k)
    if (!used[k]) add_one_sided(slots, audit, eb[k], a, false);
  return finish(slots, audit);
}

}  // namespace

std::string to_string(MatchStrategy s) {
  return s == MatchStrategy::kFixedLattice ? "fixed_lattice" : "greedy_nearest";
}

MatchStrategy match_strategy_from_string(const std::string& s) {
  if (s == "fixed_lattice") return MatchStrategy::kFixedLattice;
  if (s == "greedy_nearest") return MatchStrategy::kGreedyNearest;
  throw InputError("unknown matching strategy '" + s + "' (expected fixed_lattice or greedy_nearest)");
}

void CoincidencePolicy::validate() const {
  if (window_ns <= 0) throw InputError("coincidence window must be > 0 ns");
}

MatchResult match_coincidences(const RawEventStream& a, const RawEventStream& b,
                               const CoincidencePolicy& policy) {
  policy.validate();
  a.check_sorted();
  b.check_sorted();
  return policy.strategy == MatchStrategy::kFixedLattice ? match_lattice(a, b, policy.window_ns)
                                                         : match_greedy(a, b, policy.window_ns);
}

ContextTable tally(std::span<const RawPair> pairs) {
  ContextTable t;
  for (const auto& p : pairs) t.add(p.settings, p.a, p.b);
  return t;
}

SingleCounts single_counts(const RawEventStream& a, const RawEventStream& b) {
  SingleCounts out;
  for (const auto& e : a.events) {
    if (const auto y = b.setting_at(e.time_ns))
      out.table.add({e.setting, *y}, e.outcome, Outcome::kNone);
    else
      ++out.unattributed;
  }
  for (const auto& e : b.events) {
    if (const auto x = a.setting_at(e.time_ns))
      out.table.add({*x, e.setting}, Outcome::kNone, e.outcome);
    else
      ++out.unattributed;
  }
  return out;
}

PostSelected postselect(std::span<const RawPair> pairs) {
  PostSelected out;
  for (const auto& p : pairs) {
    const std::size_t k = p.settings.index();
    ++out.total[k];
    if (p.a != Outcome::kNone && p.b != Outcome::kNone) {
      ++out.kept[k];
      out.retained.push_back(p);
    }
  }
  for (std::size_t k = 0; k < 4; ++k)
    if (out.total[k] > 0)
      out.retention[k] = static_cast<double>(out.kept[k]) / static_cast<double>(out.total[k]);
  return out;
}

std::vector<WindowSweepRow> window_sweep(const RawEventStream& a, const RawEventStream& b,
                                         std::span<const std::int64_t> windows,
                                         MatchStrategy strategy) {
  if (windows.empty()) throw InputError("window sweep needs at least one window");
  for (auto w : windows)
    if (w <= 0) throw InputError("window sweep windows must be > 0 ns");
  a.check_sorted();
  b.check_sorted();
  std::vector<WindowSweepRow> rows(windows.size());
  parallel_for(windows.size(), [&](std::size_t i) {
    const auto matched = match_coincidences(a, b, {windows[i], strategy});
    WindowSweepRow& row = rows[i];
    row.window_ns = windows[i];
    row.audit = matched.audit;
    // Zeros stay in the table so C_xy is the post-selection retention ratio.
    row.summary = estimate(tally(matched.pairs));
    row.chsh = chsh(row.summary);
  });
  return rows;
}

}  // namespace belllab
