#include "formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace belllab::cli {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Reads a CSV with a fixed header and calls row(fields, line_no) per data line.
template <class Fn>
void read_csv(const std::string& path, const std::string& header, std::size_t columns, Fn row) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ":1: missing header '" + header + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw InputError(path + ":1: expected header '" + header + "', got '" + line + "'");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != columns)
      throw InputError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                       " columns, got " + std::to_string(fields.size()));
    row(fields, line_no);
  }
}

template <class T>
T parse_int(const std::string& s, const std::string& where) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw InputError(where + ": '" + s + "' is not an integer");
  return v;
}

std::uint8_t parse_label(const std::string& s, const std::string& where) {
  const int v = parse_int<int>(s, where);
  if (v != 0 && v != 1) throw InputError(where + ": setting label must be 0 or 1, got " + s);
  return static_cast<std::uint8_t>(v);
}

Outcome parse_outcome(const std::string& s, const std::string& where, bool allow_zero) {
  const int v = parse_int<int>(s, where);
  if (v == 1) return Outcome::kPlus;
  if (v == -1) return Outcome::kMinus;
  if (v == 0 && allow_zero) return Outcome::kNone;
  throw InputError(where + ": invalid outcome " + s);
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string cell_key(Outcome a, Outcome b) {
  auto f = [](Outcome o) { return o == Outcome::kPlus ? "+1" : o == Outcome::kMinus ? "-1" : "0"; };
  return std::string(f(a)) + "," + f(b);
}

constexpr std::array<Outcome, 3> kOutcomes{Outcome::kPlus, Outcome::kMinus, Outcome::kNone};

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> trials) {
  out << "trial_id,x,y,a,b,ready\n";
  for (const auto& t : trials)
    out << t.trial_id << ',' << int(t.settings.x) << ',' << int(t.settings.y) << ',' << to_int(t.a)
        << ',' << to_int(t.b) << ',' << (t.ready ? 1 : 0) << '\n';
}

std::vector<TrialRecord> read_trials_csv(const std::string& path) {
  std::vector<TrialRecord> out;
  read_csv(path, "trial_id,x,y,a,b,ready", 6, [&](const auto& f, std::size_t line) {
    const std::string where = path + ":" + std::to_string(line);
    TrialRecord r;
    r.trial_id = parse_int<std::uint64_t>(f[0], where);
    r.settings = {parse_label(f[1], where), parse_label(f[2], where)};
    r.a = parse_outcome(f[3], where, true);
    r.b = parse_outcome(f[4], where, true);
    const int ready = parse_int<int>(f[5], where);
    if (ready != 0 && ready != 1) throw InputError(where + ": ready must be 0 or 1");
    r.ready = ready == 1;
    out.push_back(r);
  });
  return out;
}

void write_events_csv(std::ostream& out, std::span<const TimeTag> events) {
  out << "time_ns,setting,outcome\n";
  for (const auto& e : events) out << e.time_ns << ',' << int(e.setting) << ',' << to_int(e.outcome) << '\n';
}

std::vector<TimeTag> read_events_csv(const std::string& path) {
  std::vector<TimeTag> out;
  read_csv(path, "time_ns,setting,outcome", 3, [&](const auto& f, std::size_t line) {
    const std::string where = path + ":" + std::to_string(line);
    out.push_back({parse_int<std::int64_t>(f[0], where), parse_label(f[1], where),
                   parse_outcome(f[2], where, false)});
  });
  return out;
}

void write_settings_csv(std::ostream& out, std::span<const SettingChoice> log) {
  out << "time_ns,setting\n";
  for (const auto& c : log) out << c.time_ns << ',' << int(c.setting) << '\n';
}

std::vector<SettingChoice> read_settings_csv(const std::string& path) {
  std::vector<SettingChoice> out;
  read_csv(path, "time_ns,setting", 2, [&](const auto& f, std::size_t line) {
    const std::string where = path + ":" + std::to_string(line);
    out.push_back({parse_int<std::int64_t>(f[0], where), parse_label(f[1], where)});
  });
  return out;
}

void write_pairs_csv(std::ostream& out, std::span<const RawPair> pairs) {
  out << "time_ns,x,y,a,b\n";
  for (const auto& p : pairs)
    out << p.time_ns << ',' << int(p.settings.x) << ',' << int(p.settings.y) << ',' << to_int(p.a) << ','
        << to_int(p.b) << '\n';
}

void write_theta_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "theta_rad,E,stderr,n\n";
  for (const auto& p : points)
    out << format_double(p.theta) << ',' << (p.e ? format_double(*p.e) : "") << ','
        << format_double(p.std_error) << ',' << p.n << '\n';
}

void write_window_sweep_csv(std::ostream& out, std::span<const WindowSweepRow> rows) {
  out << "window_ns,S";
  for (const char* prefix : {"E", "C", "N"})
    for (auto s : kAllContexts) out << ',' << prefix << context_label(s);
  out << ",pairs,dropped_a,dropped_b\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.window_ns << ',' << cell(r.chsh);
    for (auto s : kAllContexts) out << ',' << cell(r.summary[s].e_ab);
    for (auto s : kAllContexts) out << ',' << cell(r.summary[s].coincidence);
    for (auto s : kAllContexts) out << ',' << r.summary[s].n_total;
    out << ',' << r.audit.pairs << ',' << r.audit.dropped_a << ',' << r.audit.dropped_b << '\n';
  }
}

Json to_json(const ContextTable& table) {
  Json j = Json::object();
  for (auto s : kAllContexts) {
    Json counts = Json::object();
    for (auto a : kOutcomes)
      for (auto b : kOutcomes) counts[cell_key(a, b)] = table.count(s, a, b);
    j[context_label(s)] = {{"counts", counts}, {"total", table.total(s)}};
  }
  return j;
}

ContextTable context_table_from_json(const Json& j) {
  ContextTable t;
  for (auto s : kAllContexts) {
    const auto& counts = j.at(context_label(s)).at("counts");
    for (auto a : kOutcomes)
      for (auto b : kOutcomes) t.add(s, a, b, counts.at(cell_key(a, b)).get<std::uint64_t>());
  }
  return t;
}

Json to_json(const CorrelationSummary& summary) {
  Json j = Json::object();
  for (auto s : kAllContexts) {
    const auto& c = summary[s];
    j[context_label(s)] = {{"E_ab", opt(c.e_ab)}, {"E_a", opt(c.e_a)},         {"E_b", opt(c.e_b)},
                           {"C", opt(c.coincidence)}, {"N", c.n_total}, {"pairs", c.n_pairs},
                           {"defined", c.e_ab.has_value()}};
  }
  return j;
}

Json to_json(const HypothesisReport& r) {
  return {{"S_hat", r.s_hat}, {"N", r.n}, {"p_value", r.p_value}, {"method", r.method},
          {"functional", r.variant.label()}};
}

Json to_json(const NoSignallingBlock& block) {
  Json comps = Json::array();
  for (const auto& c : block.comparisons) {
    Json e = {{"party", std::string(1, c.party)},
              {"local_setting", c.local_setting},
              {"n_remote0", c.n_first},
              {"n_remote1", c.n_second},
              {"defined", c.test.has_value()}};
    if (c.test) {
      e["p_plus_remote0"] = c.test->p_first;
      e["p_plus_remote1"] = c.test->p_second;
      e["delta"] = c.test->delta;
      e["stderr"] = c.test->std_error;
      e["z"] = c.test->z;
      e["p_value"] = c.test->p_value;
    }
    comps.push_back(e);
  }
  return {{"comparisons", comps}, {"block_p_bonferroni", opt(block.block_p)}};
}

Json to_json(const NoSignallingReport& r) {
  return {{"raw", to_json(r.raw)},
          {"final", to_json(r.final_data)},
          {"marginal_convention", "P(+1) among detections at the station (outcome != 0)"}};
}

Json to_json(const SeparatingFunctional& f) {
  Json coeff = Json::object();
  for (auto s : kAllContexts) coeff[context_label(s)] = f.coefficients[s.index()];
  return {{"label", f.label}, {"coefficients", coeff}, {"bound", f.bound},
          {"value", f.value}, {"slack", f.slack()}};
}

Json to_json(const FeasibilityResult& r) {
  Json j = {{"feasible", r.feasible}};
  j["cell_order"] = {"+1,+1", "+1,-1", "-1,+1", "-1,-1"};
  if (r.joint) {
    Json joint = Json::array();
    const auto strategies = deterministic_strategies();
    for (std::size_t v = 0; v < 16; ++v)
      joint.push_back({{"A0", strategies[v].alice[0]}, {"A1", strategies[v].alice[1]},
                       {"B0", strategies[v].bob[0]},   {"B1", strategies[v].bob[1]},
                       {"weight", (*r.joint)[v]}});
    j["joint"] = joint;
    j["witness_error"] = r.witness_error;
  }
  if (r.max_violation) j["max_violation"] = to_json(*r.max_violation);
  if (r.farkas) j["farkas"] = to_json(*r.farkas);
  return j;
}

Json to_json(const MatchAudit& a) {
  return {{"events_a", a.events_a},         {"events_b", a.events_b},
          {"pairs", a.pairs},               {"one_sided_a", a.one_sided_a},
          {"one_sided_b", a.one_sided_b},   {"dropped_a", a.dropped_a},
          {"dropped_b", a.dropped_b},       {"unattributed_a", a.unattributed_a},
          {"unattributed_b", a.unattributed_b}, {"conserved", a.conserved()}};
}

Json to_json(std::span<const TrialRecord> trials) {
  Json rows = Json::array();
  for (const auto& t : trials)
    rows.push_back({{"trial_id", t.trial_id}, {"x", t.settings.x}, {"y", t.settings.y},
                    {"a", to_int(t.a)}, {"b", to_int(t.b)}, {"ready", t.ready}});
  return rows;
}

Json to_json(std::span<const SweepPoint> points) {
  Json rows = Json::array();
  for (const auto& p : points)
    rows.push_back({{"theta_rad", p.theta}, {"E", opt(p.e)}, {"stderr", p.std_error}, {"n", p.n}});
  return rows;
}

Json to_json(std::span<const WindowSweepRow> rows) {
  Json out = Json::array();
  for (const auto& r : rows)
    out.push_back({{"window_ns", r.window_ns}, {"S", opt(r.chsh)}, {"summary", to_json(r.summary)},
                   {"audit", to_json(r.audit)}});
  return out;
}

PairwiseTables read_tables_json(const std::string& path) {
  const ConfigDocument cfg = load_config(path);
  const Node root(cfg.doc, "");
  try {
    const Node tables = root.at("tables");
    if (tables.size() != 4) tables.fail("expected 4 context tables (00, 01, 10, 11)");
    PairwiseTables p{};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto row = tables.at(k).numbers();
      if (row.size() != 4) tables.at(k).fail("expected 4 cell probabilities");
      for (std::size_t j = 0; j < 4; ++j) p[k][j] = row[j];
    }
    try {
      validate_tables(p);
    } catch (const InputError& e) {
      tables.fail(e.what());
    }
    return p;
  } catch (const ConfigError& e) {
    throw InputError(cfg.locate(e));
  }
}

}  // namespace belllab::cli
