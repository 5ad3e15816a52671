#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "formats.hpp"

namespace belllab::cli {
namespace fs = std::filesystem;

namespace {

struct Loaded {
  ConfigDocument cfg;
  std::uint64_t seed = 0;
  Json resolved;
};

Loaded load(const CommandOptions& o, const char* command) {
  if (!o.config) throw InputError(std::string(command) + ": --config is required");
  Loaded l{load_config(*o.config), 0, Json()};
  const Node root(l.cfg.doc, "");
  try {
    if (auto v = root.find("schema_version"))
      if (v->integer() != kSchemaVersion)
        v->fail("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    l.seed = resolve_seed(root, o.seed);
  } catch (const ConfigError& e) {
    throw InputError(l.cfg.locate(e));
  }
  l.resolved = l.cfg.doc;
  l.resolved["seed"] = l.seed;
  l.resolved["schema_version"] = kSchemaVersion;
  return l;
}

// Runs fn(root) and turns ConfigError into a located InputError.
template <class Fn>
auto with_config(const ConfigDocument& cfg, Fn fn) {
  try {
    return fn(Node(cfg.doc, ""));
  } catch (const ConfigError& e) {
    throw InputError(cfg.locate(e));
  }
}

fs::path prepare_out(const CommandOptions& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory '" + o.out + "'");
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

template <class Writer>
std::string csv(Writer w) {
  std::ostringstream s;
  w(s);
  return s.str();
}

Json header(const char* command, std::optional<std::uint64_t> seed) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"seed", seed ? Json(*seed) : Json(nullptr)}};
}

void warn(Json& warnings, std::ostream& log, const std::string& msg) {
  warnings.push_back(msg);
  log << "warning: " << msg << "\n";
}

Json stream_json(const RawEventStream& s) {
  Json events = Json::array(), settings = Json::array();
  for (const auto& e : s.events) events.push_back({e.time_ns, e.setting, to_int(e.outcome)});
  for (const auto& c : s.setting_log) settings.push_back({c.time_ns, c.setting});
  return {{"events", events}, {"settings", settings}};
}

RawEventStream stream_from_json(const Json& j, Station station, const std::string& what) {
  RawEventStream s{station, {}, {}};
  try {
    for (const auto& e : j.at("events")) {
      const int o = e.at(2).get<int>();
      if (o != 1 && o != -1) throw InputError(what + ": event outcome must be +1 or -1");
      const int x = e.at(1).get<int>();
      if (x != 0 && x != 1) throw InputError(what + ": setting must be 0 or 1");
      s.events.push_back({e.at(0).get<std::int64_t>(), static_cast<std::uint8_t>(x), outcome_from_int(o)});
    }
    for (const auto& c : j.at("settings")) {
      const int x = c.at(1).get<int>();
      if (x != 0 && x != 1) throw InputError(what + ": setting must be 0 or 1");
      s.setting_log.push_back({c.at(0).get<std::int64_t>(), static_cast<std::uint8_t>(x)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(what + ": " + e.what());
  }
  return s;
}

std::uint64_t n_trials(const Node& root) {
  const Node n = root.at("n_trials");
  const auto v = n.integer();
  if (v == 0) n.fail("n_trials must be >= 1");
  return v;
}

}  // namespace

int cmd_simulate(const CommandOptions& o, std::ostream& log) {
  const Loaded l = load(o, "simulate");
  Json meta = header("simulate", l.seed);
  Json warnings = Json::array();
  const std::string experiment =
      with_config(l.cfg, [](const Node& root) { return root.at("experiment").string(); });

  if (experiment == "event_ready" || experiment == "trials") {
    std::vector<TrialRecord> trials;
    if (experiment == "event_ready") {
      auto [cfg, angles, n] = with_config(l.cfg, [](const Node& root) {
        EventReadyConfig c = parse_event_ready(root.at("event_ready"));
        c.setting_bias = parse_setting_bias(root);
        return std::tuple{c, parse_angles(root), n_trials(root)};
      });
      EventReadyRun run = run_event_ready(cfg, angles, n, l.seed);
      meta["herald_attempts"] = run.herald_attempts;
      trials = std::move(run.trials);
    } else {
      auto [model, bias, n] = with_config(l.cfg, [](const Node& root) {
        return std::tuple{parse_model(root.at("model"), parse_angles(root)), parse_setting_bias(root),
                          n_trials(root)};
      });
      meta["model_family"] = family_name(model);
      trials = run_model_trials(model, n, l.seed, bias);
    }
    const fs::path dir = prepare_out(o);
    meta["n_trials"] = trials.size();
    meta["outputs"] = Json::array();
    if (o.format == OutputFormat::kCsv) {
      write_file(dir / "trials.csv", csv([&](std::ostream& s) { write_trials_csv(s, trials); }));
      meta["outputs"].push_back("trials.csv");
    } else {
      Json doc = header("simulate", l.seed);
      doc["trials"] = to_json(std::span<const TrialRecord>(trials));
      write_json(dir / "trials.json", doc);
      meta["outputs"].push_back("trials.json");
    }
    meta["config"] = l.resolved;
    meta["warnings"] = warnings;
    write_json(dir / "metadata.json", meta);
    return 0;
  }

  if (experiment == "source") {
    auto [cfg, model] = with_config(l.cfg, [](const Node& root) {
      SourceProtocolConfig c = parse_source(root.at("source"));
      c.setting_bias = parse_setting_bias(root);
      return std::tuple{c, parse_model(root.at("model"), parse_angles(root))};
    });
    const SourceRun run = run_source_experiment(cfg, model, l.seed);
    if (run.low_rate_warning)
      warn(warnings, log,
           "pair_rate * duration = " + format_double(run.expected_pairs) + " < 1 expected pair");
    const fs::path dir = prepare_out(o);
    meta["model_family"] = family_name(model);
    meta["pairs_emitted"] = run.pairs_emitted;
    meta["expected_pairs"] = run.expected_pairs;
    meta["pair_events"] = {{"A", run.pair_events[0]}, {"B", run.pair_events[1]}};
    meta["dark_events"] = {{"A", run.dark_events[0]}, {"B", run.dark_events[1]}};
    meta["expected_dark_events"] = {{"A", cfg.dark_rate[0] * cfg.duration},
                                    {"B", cfg.dark_rate[1] * cfg.duration}};
    meta["outputs"] = Json::array();
    if (o.format == OutputFormat::kCsv) {
      for (const auto* s : {&run.a, &run.b}) {
        const std::string tag = s->station == Station::kA ? "A" : "B";
        write_file(dir / ("events_" + tag + ".csv"), csv([&](std::ostream& out) { write_events_csv(out, s->events); }));
        write_file(dir / ("settings_" + tag + ".csv"),
                   csv([&](std::ostream& out) { write_settings_csv(out, s->setting_log); }));
        meta["outputs"].push_back("events_" + tag + ".csv");
        meta["outputs"].push_back("settings_" + tag + ".csv");
      }
    } else {
      Json doc = header("simulate", l.seed);
      doc["A"] = stream_json(run.a);
      doc["B"] = stream_json(run.b);
      write_json(dir / "events.json", doc);
      meta["outputs"].push_back("events.json");
    }
    meta["config"] = l.resolved;
    meta["warnings"] = warnings;
    write_json(dir / "metadata.json", meta);
    return 0;
  }

  with_config(l.cfg, [&](const Node& root) -> int {
    root.at("experiment").fail("unknown experiment '" + experiment + "' (expected event_ready, source or trials)");
  });
  return 2;
}

namespace {

enum class InputKind { kTrials, kEvents };

struct AnalysisInput {
  InputKind kind = InputKind::kTrials;
  std::vector<TrialRecord> trials;
  RawEventStream a{Station::kA, {}, {}};
  RawEventStream b{Station::kB, {}, {}};
  std::optional<std::uint64_t> seed;
  std::optional<CoincidencePolicy> window;
};

AnalysisInput read_input(const fs::path& dir) {
  AnalysisInput in;
  if (!fs::is_directory(dir)) throw InputError("input directory '" + dir.string() + "' does not exist");
  if (fs::exists(dir / "metadata.json")) {
    const ConfigDocument meta = load_config((dir / "metadata.json").string());
    if (meta.doc.contains("seed") && meta.doc["seed"].is_number_unsigned())
      in.seed = meta.doc["seed"].get<std::uint64_t>();
    if (meta.doc.contains("config") && meta.doc["config"].contains("window")) {
      const Node w(meta.doc["config"]["window"], "/config/window");
      try {
        in.window = parse_window(w);
      } catch (const ConfigError& e) {
        throw InputError(meta.locate(e));
      }
    }
  }
  if (fs::exists(dir / "trials.csv")) {
    in.trials = read_trials_csv((dir / "trials.csv").string());
  } else if (fs::exists(dir / "trials.json")) {
    const ConfigDocument doc = load_config((dir / "trials.json").string());
    const std::string what = (dir / "trials.json").string();
    try {
      for (const auto& t : doc.doc.at("trials")) {
        TrialRecord r;
        r.trial_id = t.at("trial_id").get<std::uint64_t>();
        const int x = t.at("x").get<int>(), y = t.at("y").get<int>();
        if ((x != 0 && x != 1) || (y != 0 && y != 1)) throw InputError(what + ": setting must be 0 or 1");
        r.settings = {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)};
        r.a = outcome_from_int(t.at("a").get<int>());
        r.b = outcome_from_int(t.at("b").get<int>());
        r.ready = t.at("ready").get<bool>();
        in.trials.push_back(r);
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(what + ": " + e.what());
    }
  } else if (fs::exists(dir / "events_A.csv") && fs::exists(dir / "events_B.csv")) {
    in.kind = InputKind::kEvents;
    in.a.events = read_events_csv((dir / "events_A.csv").string());
    in.b.events = read_events_csv((dir / "events_B.csv").string());
    if (fs::exists(dir / "settings_A.csv")) in.a.setting_log = read_settings_csv((dir / "settings_A.csv").string());
    if (fs::exists(dir / "settings_B.csv")) in.b.setting_log = read_settings_csv((dir / "settings_B.csv").string());
  } else if (fs::exists(dir / "events.json")) {
    in.kind = InputKind::kEvents;
    const ConfigDocument doc = load_config((dir / "events.json").string());
    const std::string what = (dir / "events.json").string();
    if (!doc.doc.contains("A") || !doc.doc.contains("B")) throw InputError(what + ": needs both stations A and B");
    in.a = stream_from_json(doc.doc["A"], Station::kA, what);
    in.b = stream_from_json(doc.doc["B"], Station::kB, what);
  } else {
    throw InputError("no trials or time-tag files found in '" + dir.string() + "'");
  }
  if (in.kind == InputKind::kEvents) {
    in.a.check_sorted();
    in.b.check_sorted();
  }
  return in;
}

}  // namespace

int cmd_analyze(const CommandOptions& o, std::ostream& log) {
  std::optional<std::string> input = o.input;
  std::optional<CoincidencePolicy> window;
  std::optional<std::uint64_t> seed = o.seed;
  if (o.config) {
    const ConfigDocument cfg = load_config(*o.config);
    with_config(cfg, [&](const Node& root) {
      if (!input) input = root.at("input").string();
      if (auto w = root.find("window")) window = parse_window(*w);
      if (!seed && root.has("seed")) seed = root.at("seed").integer();
      return 0;
    });
  }
  if (!input) throw InputError("analyze: --input DIR (or an 'input' entry in the config) is required");
  AnalysisInput in = read_input(*input);
  if (!seed) seed = in.seed;
  if (!window) window = in.window;
  if (o.window_ns) {
    if (!window) window = CoincidencePolicy{};
    window->window_ns = *o.window_ns;
  }
  if (o.strategy) {
    if (!window) throw InputError("analyze: --strategy needs a window width");
    window->strategy = match_strategy_from_string(*o.strategy);
  }

  Json report = header("analyze", seed);
  Json warnings = Json::array();
  ContextTable raw, final_table, full;
  if (in.kind == InputKind::kTrials) {
    std::vector<TrialRecord> ready;
    for (const auto& t : in.trials)
      if (t.ready) ready.push_back(t);
    full = tally(ready);
    raw = full;
    std::vector<TrialRecord> kept;
    for (const auto& t : ready)
      if (t.a != Outcome::kNone && t.b != Outcome::kNone) kept.push_back(t);
    final_table = tally(kept);
    report["input_kind"] = "trials";
    report["trials"] = {{"total", in.trials.size()}, {"ready", ready.size()}, {"retained", kept.size()}};
  } else {
    if (!window) throw InputError("analyze: time-tag input needs a coincidence window (--window NS or config 'window')");
    window->validate();
    const MatchResult matched = match_coincidences(in.a, in.b, *window);
    const PostSelected ps = postselect(matched.pairs);
    const SingleCounts singles = single_counts(in.a, in.b);
    full = tally(matched.pairs);
    final_table = tally(ps.retained);
    raw = singles.table;
    report["input_kind"] = "time_tags";
    report["window"] = {{"width_ns", window->window_ns}, {"strategy", to_string(window->strategy)}};
    report["audit"] = to_json(matched.audit);
    report["unattributed_single_counts"] = singles.unattributed;
    Json retention = Json::object();
    for (auto s : kAllContexts) {
      const auto& r = ps.retention[s.index()];
      retention[context_label(s)] = r ? Json(*r) : Json(nullptr);
    }
    report["retention"] = retention;
    if (singles.unattributed > 0)
      warn(warnings, log, std::to_string(singles.unattributed) + " clicks have no remote setting log entry");
  }

  const CorrelationSummary summary = estimate(final_table);
  const CorrelationSummary with_zeros = estimate(full);
  report["counts"] = to_json(final_table);
  report["summary"] = to_json(summary);
  // Coincidence fractions count zero outcomes, so they come from the unfiltered slots.
  for (auto s : kAllContexts) {
    const auto& c = with_zeros[s].coincidence;
    report["summary"][context_label(s)]["C"] = c ? Json(*c) : Json(nullptr);
  }
  for (auto s : kAllContexts)
    if (!summary[s].e_ab) warn(warnings, log, "context " + context_label(s) + " has no retained pairs; marked undefined");

  const auto s_value = chsh(summary);
  report["S"] = s_value ? Json(*s_value) : Json(nullptr);
  try {
    report["hypothesis"] = to_json(lhv_pvalue(summary));
    report["hypothesis_best_of_8"] = to_json(lhv_pvalue_best_variant(summary));
  } catch (const InputError& e) {
    report["hypothesis"] = nullptr;
    report["hypothesis_best_of_8"] = nullptr;
    warn(warnings, log, std::string("hypothesis test skipped: ") + e.what());
  }
  report["no_signalling"] = to_json(nosignalling_test(raw, final_table));
  report["warnings"] = warnings;

  const fs::path dir = prepare_out(o);
  write_json(dir / "report.json", report);
  return 0;
}

int cmd_sweep(const CommandOptions& o, std::ostream& log) {
  const Loaded l = load(o, "sweep");
  Json meta = header("sweep", l.seed);
  Json warnings = Json::array();
  const std::string kind = with_config(l.cfg, [](const Node& root) { return root.at("sweep").string(); });

  if (kind == "theta") {
    auto [family, grid, mode, n, label] = with_config(l.cfg, [](const Node& root) {
      const Node model = root.at("model");
      const std::string name = model.at("family").string();
      AngleFamily family;
      if (name == "singlet") {
        double v = 1.0;
        if (auto n = model.find("visibility")) v = n->number(0.0, 1.0);
        family = singlet_family(v);
      } else if (name == "pearle_like") {
        family = pearle_family(parse_pearle_options(model));
      } else {
        model.at("family").fail("theta sweeps support the singlet and pearle_like families");
      }
      SweepMode mode = SweepMode::kMonteCarlo;
      std::uint64_t n = 0;
      if (auto m = root.find("mode")) {
        const std::string s = m->string();
        if (s == "exact") mode = SweepMode::kExact;
        else if (s != "monte_carlo") m->fail("mode must be 'exact' or 'monte_carlo'");
      }
      if (mode == SweepMode::kMonteCarlo) {
        const Node np = root.at("n_per_point");
        n = np.integer();
        if (n == 0) np.fail("n_per_point must be >= 1");
      }
      return std::tuple{family, parse_grid(root.at("grid")), mode, n, name};
    });
    const auto points = theta_sweep(family, grid, mode, n, l.seed);
    meta["model_family"] = label;
    meta["mode"] = mode == SweepMode::kExact ? "exact" : "monte_carlo";
    meta["points"] = points.size();
    meta["cosine_amplitude"] = fit_cosine_amplitude(points);
    const fs::path dir = prepare_out(o);
    if (o.format == OutputFormat::kCsv) {
      write_file(dir / "sweep.csv", csv([&](std::ostream& s) { write_theta_sweep_csv(s, points); }));
      meta["outputs"] = {"sweep.csv"};
    } else {
      Json doc = header("sweep", l.seed);
      doc["points"] = to_json(std::span<const SweepPoint>(points));
      write_json(dir / "sweep.json", doc);
      meta["outputs"] = {"sweep.json"};
    }
    meta["config"] = l.resolved;
    meta["warnings"] = warnings;
    write_json(dir / "metadata.json", meta);
    return 0;
  }

  if (kind == "window") {
    auto [cfg, model, windows, strategy] = with_config(l.cfg, [](const Node& root) {
      SourceProtocolConfig c = parse_source(root.at("source"));
      c.setting_bias = parse_setting_bias(root);
      const Node wn = root.at("windows");
      std::vector<std::int64_t> w;
      if (wn.json().is_array()) {
        for (std::size_t i = 0; i < wn.size(); ++i) {
          w.push_back(wn.at(i).signed_integer());
          if (w.back() <= 0) wn.at(i).fail("window widths must be > 0");
        }
      } else {
        for (double v : parse_grid(wn)) {
          w.push_back(std::llround(v));
          if (w.back() <= 0) wn.fail("window widths must be > 0");
        }
      }
      if (w.empty()) wn.fail("grid is empty");
      MatchStrategy strategy = MatchStrategy::kFixedLattice;
      if (auto s = root.find("strategy")) {
        try {
          strategy = match_strategy_from_string(s->string());
        } catch (const InputError& e) {
          s->fail(e.what());
        }
      }
      return std::tuple{c, parse_model(root.at("model"), parse_angles(root)), w, strategy};
    });
    const SourceRun run = run_source_experiment(cfg, model, l.seed);
    if (run.low_rate_warning)
      warn(warnings, log, "pair_rate * duration = " + format_double(run.expected_pairs) + " < 1 expected pair");
    const auto rows = window_sweep(run.a, run.b, windows, strategy);
    meta["model_family"] = family_name(model);
    meta["strategy"] = to_string(strategy);
    meta["pairs_emitted"] = run.pairs_emitted;
    meta["dark_events"] = {{"A", run.dark_events[0]}, {"B", run.dark_events[1]}};
    const fs::path dir = prepare_out(o);
    if (o.format == OutputFormat::kCsv) {
      write_file(dir / "sweep.csv", csv([&](std::ostream& s) { write_window_sweep_csv(s, rows); }));
      meta["outputs"] = {"sweep.csv"};
    } else {
      Json doc = header("sweep", l.seed);
      doc["rows"] = to_json(std::span<const WindowSweepRow>(rows));
      write_json(dir / "sweep.json", doc);
      meta["outputs"] = {"sweep.json"};
    }
    meta["config"] = l.resolved;
    meta["warnings"] = warnings;
    write_json(dir / "metadata.json", meta);
    return 0;
  }

  with_config(l.cfg, [&](const Node& root) -> int {
    root.at("sweep").fail("unknown sweep '" + kind + "' (expected theta or window)");
  });
  return 2;
}

int cmd_feasibility(const CommandOptions& o, std::ostream&) {
  const std::optional<std::string> path = o.input ? o.input : o.config;
  if (!path) throw InputError("feasibility: --input FILE (a JSON file with 'tables') is required");
  const PairwiseTables tables = read_tables_json(*path);
  std::optional<std::uint64_t> seed = o.seed;
  Json out = header("feasibility", seed);
  Json echo = Json::array();
  for (const auto& row : tables) echo.push_back(row);
  out["tables"] = echo;
  out["result"] = to_json(coupling_feasibility(tables));
  const fs::path dir = prepare_out(o);
  write_json(dir / "feasibility.json", out);
  return 0;
}

}  // namespace belllab::cli
