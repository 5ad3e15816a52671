#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "belllab/analysis.hpp"
#include "belllab/pipeline.hpp"
#include "belllab/protocol.hpp"
#include "belllab/statistics.hpp"
#include "config.hpp"

namespace belllab::cli {

// CSV files.  Headers are fixed; outcomes are written as -1, 0, 1.

/// trial_id,x,y,a,b,ready
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials);
std::vector<TrialRecord> read_trials_csv(const std::string& path);

/// time_ns,setting,outcome
void write_events_csv(std::ostream& out, std::span<const TimeTag> events);
std::vector<TimeTag> read_events_csv(const std::string& path);

/// time_ns,setting
void write_settings_csv(std::ostream& out, std::span<const SettingChoice> log);
std::vector<SettingChoice> read_settings_csv(const std::string& path);

/// time_ns,x,y,a,b
void write_pairs_csv(std::ostream& out, std::span<const RawPair> pairs);

/// theta_rad,E,stderr,n
void write_theta_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

/// window_ns,S,E00..E11,C00..C11,N00..N11,pairs,dropped_a,dropped_b
void write_window_sweep_csv(std::ostream& out, std::span<const WindowSweepRow> rows);

/// Shortest text that parses back to the same double; "nan" and "inf" as is.
std::string format_double(double v);

// JSON encodings.

Json to_json(const ContextTable& table);
Json to_json(const CorrelationSummary& summary);
Json to_json(const HypothesisReport& report);
Json to_json(const NoSignallingBlock& block);
Json to_json(const NoSignallingReport& report);
Json to_json(const SeparatingFunctional& f);
Json to_json(const FeasibilityResult& result);
Json to_json(const MatchAudit& audit);
Json to_json(std::span<const TrialRecord> trials);
Json to_json(std::span<const SweepPoint> points);
Json to_json(std::span<const WindowSweepRow> rows);

ContextTable context_table_from_json(const Json& j);

/// {"tables": [[p(+,+), p(+,-), p(-,+), p(-,-)] for contexts 00, 01, 10, 11]}
PairwiseTables read_tables_json(const std::string& path);

}  // namespace belllab::cli
