#include "belllab/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "belllab/parallel.hpp"

namespace belllab {
namespace {

std::uint64_t chunk_count(std::uint64_t n, std::uint64_t chunk) { return (n + chunk - 1) / chunk; }

void check_bias(const std::array<double, 2>& bias) {
  for (double p : bias)
    if (!(p > 0.0 && p < 1.0)) throw InputError("setting_bias must lie in (0, 1)");
}

std::size_t outcome_slot(Outcome o) { return o == Outcome::kPlus ? 0 : 1; }

struct Stamped {
  std::int64_t time;
  std::uint64_t seq;
  TimeTag tag;
};

void sort_stamped(std::vector<Stamped>& v) {
  std::sort(v.begin(), v.end(), [](const Stamped& l, const Stamped& r) {
    return l.time != r.time ? l.time < r.time : l.seq < r.seq;
  });
}

std::vector<Stamped> dark_events(double rate_per_s, double duration_ns, double bias,
                                 std::uint64_t seed, StreamKind kind) {
  std::vector<Stamped> out;
  if (rate_per_s <= 0.0) return out;
  RngStream rng(seed, stream_id(kind, 0));
  const double rate_per_ns = rate_per_s * 1e-9;
  double t = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    t += rng.exponential(rate_per_ns);
    if (t >= duration_ns) break;
    const auto setting = static_cast<std::uint8_t>(rng.uniform() < bias);
    const Outcome o = rng.uniform() < 0.5 ? Outcome::kPlus : Outcome::kMinus;
    const auto time = static_cast<std::int64_t>(std::floor(t));
    out.push_back({time, k, {time, setting, o}});
  }
  return out;
}

}  // namespace

std::optional<std::uint8_t> RawEventStream::setting_at(std::int64_t t) const {
  if (setting_log.empty()) return std::nullopt;
  auto it = std::upper_bound(setting_log.begin(), setting_log.end(), t,
                             [](std::int64_t v, const SettingChoice& c) { return v < c.time_ns; });
  if (it == setting_log.begin()) return setting_log.front().setting;
  return std::prev(it)->setting;
}

void RawEventStream::check_sorted() const {
  const char* name = station == Station::kA ? "A" : "B";
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].time_ns < events[i - 1].time_ns)
      throw InputError(std::string("station ") + name + " events are not time-sorted at row " +
                       std::to_string(i + 1) + " (" + std::to_string(events[i].time_ns) + " < " +
                       std::to_string(events[i - 1].time_ns) + ")");
  for (std::size_t i = 1; i < setting_log.size(); ++i)
    if (setting_log[i].time_ns < setting_log[i - 1].time_ns)
      throw InputError(std::string("station ") + name +
                       " setting log is not time-sorted at row " + std::to_string(i + 1));
}

void SourceProtocolConfig::validate() const {
  if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate)) throw InputError("pair_rate must be >= 0");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InputError("duration must be > 0");
  if (!(jitter_sd >= 0.0) || !std::isfinite(jitter_sd)) throw InputError("jitter_sd must be >= 0");
  for (double r : dark_rate)
    if (!(r >= 0.0) || !std::isfinite(r)) throw InputError("dark_rate must be >= 0");
  check_bias(setting_bias);
}

std::uint64_t SourceProtocolConfig::pairs() const {
  return static_cast<std::uint64_t>(std::llround(pair_rate * duration));
}

SourceRun run_source_experiment(const SourceProtocolConfig& cfg, const CouplingModel& model,
                                std::uint64_t seed) {
  cfg.validate();
  const std::uint64_t n = cfg.pairs();
  const double duration_ns = cfg.duration * 1e9;

  struct Chunk {
    std::vector<Stamped> a, b;
    std::vector<std::pair<std::uint64_t, SettingChoice>> log_a, log_b;
  };
  const std::uint64_t chunks = chunk_count(n, kSourceChunk);
  std::vector<Chunk> parts(chunks);

  parallel_for(chunks, [&](std::size_t c) {
    RngStream rng(seed, stream_id(StreamKind::kSourcePairs, c));
    Chunk& part = parts[c];
    const std::uint64_t begin = c * kSourceChunk;
    const std::uint64_t end = std::min(n, begin + kSourceChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto emission = static_cast<std::int64_t>(std::floor(rng.uniform() * duration_ns));
      const SettingPair s{static_cast<std::uint8_t>(rng.uniform() < cfg.setting_bias[0]),
                          static_cast<std::uint8_t>(rng.uniform() < cfg.setting_bias[1])};
      const auto [a, b] = sample_trial(model, s, rng);
      const auto jitter_a = std::llround(cfg.jitter_sd * rng.normal());
      const auto jitter_b = std::llround(cfg.jitter_sd * rng.normal());
      part.log_a.push_back({i, {emission, s.x}});
      part.log_b.push_back({i, {emission, s.y}});
      if (a != Outcome::kNone) {
        const std::int64_t t = emission + jitter_a + cfg.setting_delay[0][s.x] +
                               cfg.detector_delay[0][outcome_slot(a)];
        part.a.push_back({t, i, {t, s.x, a}});
      }
      if (b != Outcome::kNone) {
        const std::int64_t t = emission + jitter_b + cfg.setting_delay[1][s.y] +
                               cfg.detector_delay[1][outcome_slot(b)];
        part.b.push_back({t, i, {t, s.y, b}});
      }
    }
  });

  SourceRun run;
  run.pairs_emitted = n;
  run.expected_pairs = cfg.pair_rate * cfg.duration;
  run.low_rate_warning = run.expected_pairs < 1.0;
  run.a.station = Station::kA;
  run.b.station = Station::kB;

  std::vector<Stamped> a, b;
  std::vector<std::pair<std::uint64_t, SettingChoice>> log_a, log_b;
  for (auto& part : parts) {
    a.insert(a.end(), part.a.begin(), part.a.end());
    b.insert(b.end(), part.b.begin(), part.b.end());
    log_a.insert(log_a.end(), part.log_a.begin(), part.log_a.end());
    log_b.insert(log_b.end(), part.log_b.begin(), part.log_b.end());
  }
  run.pair_events = {a.size(), b.size()};

  auto dark_a = dark_events(cfg.dark_rate[0], duration_ns, cfg.setting_bias[0], seed, StreamKind::kDarkA);
  auto dark_b = dark_events(cfg.dark_rate[1], duration_ns, cfg.setting_bias[1], seed, StreamKind::kDarkB);
  run.dark_events = {dark_a.size(), dark_b.size()};
  for (auto& d : dark_a) d.seq += n;
  for (auto& d : dark_b) d.seq += n;
  a.insert(a.end(), dark_a.begin(), dark_a.end());
  b.insert(b.end(), dark_b.begin(), dark_b.end());

  sort_stamped(a);
  sort_stamped(b);
  run.a.events.reserve(a.size());
  run.b.events.reserve(b.size());
  for (const auto& e : a) run.a.events.push_back(e.tag);
  for (const auto& e : b) run.b.events.push_back(e.tag);

  auto finish_log = [](std::vector<std::pair<std::uint64_t, SettingChoice>>& log,
                       std::vector<SettingChoice>& out) {
    std::sort(log.begin(), log.end(), [](const auto& l, const auto& r) {
      return l.second.time_ns != r.second.time_ns ? l.second.time_ns < r.second.time_ns
                                                  : l.first < r.first;
    });
    out.reserve(log.size());
    for (const auto& [seq, choice] : log) out.push_back(choice);
  };
  finish_log(log_a, run.a.setting_log);
  finish_log(log_b, run.b.setting_log);
  return run;
}

void EventReadyConfig::validate() const {
  if (!(herald_prob > 0.0 && herald_prob <= 1.0)) throw InputError("herald_prob must lie in (0, 1]");
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw InputError("visibility must lie in [0, 1]");
  if (!(fidelity_a >= 0.5 && fidelity_a <= 1.0)) throw InputError("fidelity_a must lie in [0.5, 1]");
  if (!(fidelity_b >= 0.5 && fidelity_b <= 1.0)) throw InputError("fidelity_b must lie in [0.5, 1]");
  check_bias(setting_bias);
}

EventReadyRun run_event_ready(const EventReadyConfig& cfg, const AngleAssignment& angles,
                              std::uint64_t n_trials, std::uint64_t seed) {
  cfg.validate();
  if (n_trials < 1) throw InputError("n_trials must be >= 1");
  const CouplingModel singlet = QuantumSingletModel(angles, cfg.visibility);

  EventReadyRun run;
  run.trials.resize(n_trials);
  const std::uint64_t chunks = chunk_count(n_trials, kTrialChunk);
  std::vector<std::uint64_t> attempts(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    RngStream rng(seed, stream_id(StreamKind::kEventReady, c));
    const std::uint64_t begin = c * kTrialChunk;
    const std::uint64_t end = std::min(n_trials, begin + kTrialChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      do {
        ++attempts[c];
      } while (!(rng.uniform() < cfg.herald_prob));
      const SettingPair s{static_cast<std::uint8_t>(rng.uniform() < cfg.setting_bias[0]),
                          static_cast<std::uint8_t>(rng.uniform() < cfg.setting_bias[1])};
      auto [a, b] = sample_trial(singlet, s, rng);
      if (rng.uniform() >= cfg.fidelity_a) a = flip(a);
      if (rng.uniform() >= cfg.fidelity_b) b = flip(b);
      run.trials[i] = {i, s, a, b, true};
    }
  });
  run.herald_attempts = std::accumulate(attempts.begin(), attempts.end(), std::uint64_t{0});
  return run;
}

std::vector<TrialRecord> run_model_trials(const CouplingModel& model, std::uint64_t n_trials,
                                          std::uint64_t seed, std::array<double, 2> setting_bias) {
  check_bias(setting_bias);
  std::vector<TrialRecord> trials(n_trials);
  parallel_for(chunk_count(n_trials, kTrialChunk), [&](std::size_t c) {
    RngStream rng(seed, stream_id(StreamKind::kTrials, c));
    const std::uint64_t begin = c * kTrialChunk;
    const std::uint64_t end = std::min(n_trials, begin + kTrialChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      const SettingPair s{static_cast<std::uint8_t>(rng.uniform() < setting_bias[0]),
                          static_cast<std::uint8_t>(rng.uniform() < setting_bias[1])};
      const auto [a, b] = sample_trial(model, s, rng);
      trials[i] = {i, s, a, b, true};
    }
  });
  return trials;
}

}  // namespace belllab
