#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "belllab/protocol.hpp"
#include "belllab/statistics.hpp"

namespace belllab {

enum class MatchStrategy { kFixedLattice, kGreedyNearest };

std::string to_string(MatchStrategy s);
MatchStrategy match_strategy_from_string(const std::string& s);

struct CoincidencePolicy {
  std::int64_t window_ns = 1;
  MatchStrategy strategy = MatchStrategy::kFixedLattice;

  void validate() const;
};

/// One slot of windowed raw data; 0 marks the side without a click.
struct RawPair {
  SettingPair settings;
  Outcome a = Outcome::kNone;
  Outcome b = Outcome::kNone;
  std::int64_t time_ns = 0;

  friend bool operator==(const RawPair&, const RawPair&) = default;
};

using PairedRawData = std::vector<RawPair>;

/// Event bookkeeping for one matching pass.  Every input event lands in
/// exactly one bucket.
struct MatchAudit {
  std::uint64_t events_a = 0;
  std::uint64_t events_b = 0;
  std::uint64_t pairs = 0;          // two-sided slots
  std::uint64_t one_sided_a = 0;    // (a, 0) slots
  std::uint64_t one_sided_b = 0;    // (0, b) slots
  std::uint64_t dropped_a = 0;      // extra events in an occupied lattice bin
  std::uint64_t dropped_b = 0;
  std::uint64_t unattributed_a = 0; // one-sided, remote setting unknown (no log)
  std::uint64_t unattributed_b = 0;

  bool conserved() const {
    return events_a == pairs + one_sided_a + dropped_a + unattributed_a &&
           events_b == pairs + one_sided_b + dropped_b + unattributed_b;
  }
};

struct MatchResult {
  PairedRawData pairs;
  MatchAudit audit;
};

/// Fixed lattice: bins [kW, (k+1)W); a bin with clicks at both stations
/// yields one pair from the earliest click on each side, extra clicks are
/// dropped; a one-sided bin yields (a, 0) or (0, b) with the remote setting
/// read from the remote setting log.
///
/// Greedy: each A click in time order takes the closest unused B click with
/// |dt| <= W (ties to the earlier B click); leftovers become one-sided slots.
///
/// Throws InputError on unsorted streams.
MatchResult match_coincidences(const RawEventStream& a, const RawEventStream& b,
                               const CoincidencePolicy& policy);

ContextTable tally(std::span<const RawPair> pairs);

/// Raw single-station counts: every click contributes (a, 0) or (0, b) in
/// the context formed with the remote setting in force at that time.
/// Independent of any window.
struct SingleCounts {
  ContextTable table;
  std::uint64_t unattributed = 0;
};
SingleCounts single_counts(const RawEventStream& a, const RawEventStream& b);

struct PostSelected {
  PairedRawData retained;
  std::array<std::uint64_t, 4> total{};
  std::array<std::uint64_t, 4> kept{};
  /// C_xy = kept / total; disengaged for contexts with no slots.
  std::array<std::optional<double>, 4> retention{};
};

/// Keeps exactly the slots with a * b != 0.
PostSelected postselect(std::span<const RawPair> pairs);

struct WindowSweepRow {
  std::int64_t window_ns = 0;
  CorrelationSummary summary;
  std::optional<double> chsh;
  MatchAudit audit;
};

std::vector<WindowSweepRow> window_sweep(const RawEventStream& a, const RawEventStream& b,
                                         std::span<const std::int64_t> windows,
                                         MatchStrategy strategy = MatchStrategy::kFixedLattice);

}  // namespace belllab
