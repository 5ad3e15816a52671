#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "belllab/couplings.hpp"
#include "belllab/types.hpp"

namespace belllab {

enum class Station : std::uint8_t { kA = 0, kB = 1 };

struct TimeTag {
  std::int64_t time_ns = 0;
  std::uint8_t setting = 0;
  Outcome outcome = Outcome::kPlus;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

/// A setting choice made by a station's own RNG at time_ns.
struct SettingChoice {
  std::int64_t time_ns = 0;
  std::uint8_t setting = 0;

  friend bool operator==(const SettingChoice&, const SettingChoice&) = default;
};

/// One station's detected clicks (time-ordered) and its setting-choice log.
struct RawEventStream {
  Station station = Station::kA;
  std::vector<TimeTag> events;
  std::vector<SettingChoice> setting_log;

  /// Setting in force at time t: the latest logged choice at or before t
  /// (the first choice if t precedes the log); disengaged without a log.
  std::optional<std::uint8_t> setting_at(std::int64_t t) const;

  /// Throws InputError unless event and log times are non-decreasing.
  void check_sorted() const;

  friend bool operator==(const RawEventStream&, const RawEventStream&) = default;
};

struct SourceProtocolConfig {
  double pair_rate = 1.0e5;  // emitted pairs per second
  double duration = 1.0;     // seconds
  double jitter_sd = 0.0;    // ns, per station, rounded Gaussian
  std::array<double, 2> dark_rate{0.0, 0.0};  // background events per second, per station
  /// [station][setting label] deterministic shift in ns.
  std::array<std::array<std::int64_t, 2>, 2> setting_delay{};
  /// [station][0 for +1, 1 for -1] detector channel shift in ns.
  std::array<std::array<std::int64_t, 2>, 2> detector_delay{};
  /// P(label = 1) per station.
  std::array<double, 2> setting_bias{0.5, 0.5};

  void validate() const;
  std::uint64_t pairs() const;
};

struct SourceRun {
  RawEventStream a;
  RawEventStream b;
  std::uint64_t pairs_emitted = 0;
  std::array<std::uint64_t, 2> pair_events{};
  std::array<std::uint64_t, 2> dark_events{};
  double expected_pairs = 0.0;
  /// Set when fewer than one pair is expected over the run.
  bool low_rate_warning = false;
};

/// Pairs are emitted at i.i.d. uniform times over the run (a Poisson process
/// conditioned on its count, round(pair_rate * duration)).  Each station
/// chooses its setting independently at emission, the model is sampled at
/// the realized context, nonzero outcomes become clicks at
/// emission + rounded jitter + setting delay + detector delay, and zero
/// outcomes emit nothing.  Dark counts form an independent Poisson process
/// per station with uniform +-1 outcomes and a fresh setting draw.
///
/// Random streams: pair i uses stream (kSourcePairs, i / kSourceChunk) and
/// draws, in order, time, x, y, the model's draws, jitter A, jitter B.
SourceRun run_source_experiment(const SourceProtocolConfig& cfg, const CouplingModel& model,
                                std::uint64_t seed);

inline constexpr std::uint64_t kSourceChunk = 8192;
inline constexpr std::uint64_t kTrialChunk = 65536;

struct EventReadyConfig {
  double herald_prob = 1.0;
  double visibility = 1.0;
  double fidelity_a = 1.0;
  double fidelity_b = 1.0;
  std::array<double, 2> setting_bias{0.5, 0.5};

  void validate() const;
};

struct EventReadyRun {
  std::vector<TrialRecord> trials;
  std::uint64_t herald_attempts = 0;
};

/// Heralded trials: retry until the herald fires, choose settings, sample
/// the singlet at visibility V, then flip each readout with probability
/// 1 - F.  Every record is ready and carries +-1 outcomes.
EventReadyRun run_event_ready(const EventReadyConfig& cfg, const AngleAssignment& angles,
                              std::uint64_t n_trials, std::uint64_t seed);

/// Trials drawn straight from a coupling model with independent setting
/// choices; outcomes may be 0 for post-selection models.
std::vector<TrialRecord> run_model_trials(const CouplingModel& model, std::uint64_t n_trials,
                                          std::uint64_t seed,
                                          std::array<double, 2> setting_bias = {0.5, 0.5});

}  // namespace belllab
