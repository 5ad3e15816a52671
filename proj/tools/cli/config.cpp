#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace belllab::cli {
namespace {

std::string describe(const Json& j) {
  std::string s = j.dump();
  if (s.size() > 40) s = s.substr(0, 37) + "...";
  return s;
}

std::string field_name(const std::string& pointer) {
  const auto slash = pointer.rfind('/');
  return slash == std::string::npos ? pointer : pointer.substr(slash + 1);
}

}  // namespace

void Node::expect_object() const {
  if (!value_->is_object()) fail("expected an object, got " + describe(*value_));
}

bool Node::has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

Node Node::at(const std::string& key) const {
  expect_object();
  const auto it = value_->find(key);
  if (it == value_->end())
    throw ConfigError(pointer_, "missing required field '" + key + "'");
  return Node(*it, pointer_ + "/" + escape_pointer_token(key));
}

std::optional<Node> Node::find(const std::string& key) const {
  expect_object();
  const auto it = value_->find(key);
  if (it == value_->end()) return std::nullopt;
  return Node(*it, pointer_ + "/" + escape_pointer_token(key));
}

Node Node::at(std::size_t index) const {
  if (!value_->is_array()) fail("expected an array, got " + describe(*value_));
  if (index >= value_->size()) fail("array needs at least " + std::to_string(index + 1) + " entries");
  return Node((*value_)[index], pointer_ + "/" + std::to_string(index));
}

std::size_t Node::size() const {
  if (!value_->is_array()) fail("expected an array, got " + describe(*value_));
  return value_->size();
}

double Node::number() const {
  if (!value_->is_number()) fail("expected a number, got " + describe(*value_));
  const double v = value_->get<double>();
  if (!std::isfinite(v)) fail("expected a finite number");
  return v;
}

double Node::number(double lo, double hi) const {
  const double v = number();
  if (v < lo || v > hi) {
    std::ostringstream os;
    os << field_name(pointer_) << " must lie in [" << lo << ", " << hi << "], got " << v;
    fail(os.str());
  }
  return v;
}

std::uint64_t Node::integer() const {
  if (!value_->is_number_integer() || (value_->is_number_integer() && !value_->is_number_unsigned() &&
                                       value_->get<std::int64_t>() < 0))
    fail("expected a non-negative integer, got " + describe(*value_));
  return value_->get<std::uint64_t>();
}

std::int64_t Node::signed_integer() const {
  if (!value_->is_number_integer()) fail("expected an integer, got " + describe(*value_));
  return value_->get<std::int64_t>();
}

std::string Node::string() const {
  if (!value_->is_string()) fail("expected a string, got " + describe(*value_));
  return value_->get<std::string>();
}

std::vector<double> Node::numbers() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
  return out;
}

std::vector<int> Node::integers() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(static_cast<int>(at(i).signed_integer()));
  return out;
}

void Node::fail(const std::string& message) const { throw ConfigError(pointer_, message); }

std::string ConfigDocument::locate(const ConfigError& e) const {
  std::ostringstream os;
  os << path << ":" << lines.line_of(e.pointer()) << ": " << (e.pointer().empty() ? "/" : e.pointer())
     << ": " << e.what();
  return os.str();
}

ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  ConfigDocument cfg;
  cfg.path = path;
  cfg.text = buf.str();
  try {
    cfg.doc = Json::parse(cfg.text);
  } catch (const Json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, cfg.text.size()); ++i)
      if (cfg.text[i] == '\n') ++line;
    throw InputError(path + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  cfg.lines = JsonLineIndex(cfg.text);
  if (!cfg.doc.is_object()) throw InputError(path + ":1: config must be a JSON object");
  return cfg;
}

std::uint64_t resolve_seed(const Node& root, std::optional<std::uint64_t> override_seed) {
  if (override_seed) return *override_seed;
  if (!root.has("seed")) root.fail("missing required field 'seed' (or pass --seed)");
  return root.at("seed").integer();
}

AngleAssignment parse_angles(const Node& root) {
  const auto node = root.find("angles");
  if (!node) return AngleAssignment::canonical();
  if (node->json().is_string()) {
    if (node->string() != "canonical") node->fail("angles must be an object or \"canonical\"");
    return AngleAssignment::canonical();
  }
  AngleAssignment a;
  for (std::size_t i = 0; i < 2; ++i) {
    a.alice[i] = node->at("alice").at(i).number();
    a.bob[i] = node->at("bob").at(i).number();
  }
  if (node->at("alice").size() != 2) node->at("alice").fail("alice needs exactly 2 angles");
  if (node->at("bob").size() != 2) node->at("bob").fail("bob needs exactly 2 angles");
  return a;
}

namespace {

std::array<std::vector<int>, 2> pm_rows(const Node& n) {
  if (n.size() != 2) n.fail("expected one row per setting label (2 rows)");
  return {n.at(0).integers(), n.at(1).integers()};
}

std::array<std::vector<double>, 2> prob_rows(const Node& n) {
  if (n.size() != 2) n.fail("expected one row per setting label (2 rows)");
  return {n.at(0).numbers(), n.at(1).numbers()};
}

JointDistribution matrix(const Node& n) {
  const std::size_t rows = n.size();
  if (rows == 0) n.fail("matrix must be non-empty");
  const std::size_t cols = n.at(0).size();
  std::vector<double> flat;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = n.at(r).numbers();
    if (row.size() != cols) n.at(r).fail("ragged matrix row");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  try {
    return JointDistribution(rows, cols, std::move(flat), field_name(n.pointer()));
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    n.fail(e.what());
  }
}

ResponseTable responses(const Node& n, bool allow_zero) {
  if (n.size() != 2) n.fail("expected one table per setting label (2 tables)");
  std::array<std::vector<std::vector<int>>, 2> v;
  for (std::size_t label = 0; label < 2; ++label)
    for (std::size_t h = 0; h < n.at(label).size(); ++h) v[label].push_back(n.at(label).at(h).integers());
  try {
    return ResponseTable(v, allow_zero, field_name(n.pointer()));
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    n.fail(e.what());
  }
}

Distribution distribution(const Node& n) {
  try {
    return Distribution(n.numbers(), field_name(n.pointer()));
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    n.fail(e.what());
  }
}

}  // namespace

PearleOptions parse_pearle_options(const Node& model) {
  PearleOptions o;
  if (auto n = model.find("hidden_bins")) o.hidden_bins = n->integer();
  if (auto n = model.find("instrument_bins")) o.instrument_bins = n->integer();
  if (o.hidden_bins == 0) model.at("hidden_bins").fail("hidden_bins must be >= 1");
  if (o.instrument_bins == 0) model.at("instrument_bins").fail("instrument_bins must be >= 1");
  if (auto n = model.find("rejection_exponent")) {
    const double e = n->number();
    if (!(e > 0.0)) n->fail("rejection_exponent must be > 0");
    o.rejection = power_rejection(e);
  }
  return o;
}

CouplingModel parse_model(const Node& model, const AngleAssignment& angles) {
  const std::string family = model.at("family").string();
  try {
    if (family == "singlet") {
      double v = 1.0;
      if (auto n = model.find("visibility")) v = n->number(0.0, 1.0);
      return QuantumSingletModel(angles, v);
    }
    if (family == "deterministic") {
      return DeterministicLhvModel(model.at("weights").numbers(), pm_rows(model.at("alice")),
                                   pm_rows(model.at("bob")));
    }
    if (family == "stochastic") {
      return StochasticLhvModel(model.at("weights").numbers(), prob_rows(model.at("alice_plus")),
                                prob_rows(model.at("bob_plus")));
    }
    if (family == "contextual") {
      const Node instr = model.at("instruments");
      std::array<JointDistribution, 4> tables;
      for (auto s : kAllContexts) tables[s.index()] = matrix(instr.at(context_label(s)));
      return ContextualHvModel(matrix(model.at("hidden")), std::move(tables),
                               responses(model.at("alice"), false), responses(model.at("bob"), false));
    }
    if (family == "post_selection") {
      const Node ai = model.at("alice_instruments"), bi = model.at("bob_instruments");
      return PostSelectionModel(matrix(model.at("hidden")),
                                {distribution(ai.at(0)), distribution(ai.at(1))},
                                {distribution(bi.at(0)), distribution(bi.at(1))},
                                responses(model.at("alice"), true), responses(model.at("bob"), true));
    }
    if (family == "pearle_like") return make_pearle_like(angles, parse_pearle_options(model));
    if (family == "larsson_gill") return make_larsson_gill();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    model.fail(e.what());
  }
  model.at("family").fail("unknown model family '" + family +
                          "' (expected singlet, deterministic, stochastic, contextual, "
                          "post_selection, pearle_like or larsson_gill)");
}

namespace {

std::array<std::int64_t, 2> delay_pair(const Node& n, const char* first, const char* second) {
  std::array<std::int64_t, 2> out{};
  if (n.json().is_array()) {
    if (n.size() != 2) n.fail("expected 2 delays");
    out = {n.at(0).signed_integer(), n.at(1).signed_integer()};
  } else {
    if (auto v = n.find(first)) out[0] = v->signed_integer();
    if (auto v = n.find(second)) out[1] = v->signed_integer();
  }
  return out;
}

std::array<double, 2> per_station(const Node& n) {
  if (n.json().is_number()) {
    const double v = n.number();
    return {v, v};
  }
  if (n.size() != 2) n.fail("expected a number or [A, B]");
  return {n.at(0).number(), n.at(1).number()};
}

}  // namespace

SourceProtocolConfig parse_source(const Node& source) {
  SourceProtocolConfig c;
  c.pair_rate = source.at("pair_rate").number();
  if (c.pair_rate < 0.0) source.at("pair_rate").fail("pair_rate must be >= 0");
  c.duration = source.at("duration").number();
  if (!(c.duration > 0.0)) source.at("duration").fail("duration must be > 0");
  if (auto n = source.find("jitter_sd")) {
    c.jitter_sd = n->number();
    if (c.jitter_sd < 0.0) n->fail("jitter_sd must be >= 0");
  }
  if (auto n = source.find("dark_rate")) {
    c.dark_rate = per_station(*n);
    for (double r : c.dark_rate)
      if (r < 0.0) n->fail("dark_rate must be >= 0");
  }
  if (auto n = source.find("setting_delay")) {
    if (auto a = n->find("A")) c.setting_delay[0] = delay_pair(*a, "0", "1");
    if (auto b = n->find("B")) c.setting_delay[1] = delay_pair(*b, "0", "1");
  }
  if (auto n = source.find("detector_delay")) {
    if (auto a = n->find("A")) c.detector_delay[0] = delay_pair(*a, "plus", "minus");
    if (auto b = n->find("B")) c.detector_delay[1] = delay_pair(*b, "plus", "minus");
  }
  return c;
}

EventReadyConfig parse_event_ready(const Node& n) {
  EventReadyConfig c;
  if (auto v = n.find("herald_prob")) {
    c.herald_prob = v->number(0.0, 1.0);
    if (c.herald_prob == 0.0) v->fail("herald_prob must lie in (0, 1], got 0");
  }
  if (auto v = n.find("visibility")) c.visibility = v->number(0.0, 1.0);
  if (auto v = n.find("fidelity_a")) c.fidelity_a = v->number(0.5, 1.0);
  if (auto v = n.find("fidelity_b")) c.fidelity_b = v->number(0.5, 1.0);
  return c;
}

std::array<double, 2> parse_setting_bias(const Node& root) {
  const auto n = root.find("setting_bias");
  if (!n) return {0.5, 0.5};
  auto bias = per_station(*n);
  for (double p : bias)
    if (!(p > 0.0 && p < 1.0)) n->fail("setting_bias must lie in (0, 1)");
  return bias;
}

CoincidencePolicy parse_window(const Node& window) {
  CoincidencePolicy p;
  const Node w = window.at("width_ns");
  p.window_ns = w.signed_integer();
  if (p.window_ns <= 0) w.fail("width_ns must be > 0");
  if (auto s = window.find("strategy")) {
    try {
      p.strategy = match_strategy_from_string(s->string());
    } catch (const InputError& e) {
      s->fail(e.what());
    }
  }
  return p;
}

std::vector<double> parse_grid(const Node& grid) {
  if (grid.json().is_array()) {
    auto v = grid.numbers();
    if (v.empty()) grid.fail("grid is empty");
    return v;
  }
  const double start = grid.at("start").number();
  const double stop = grid.at("stop").number();
  const std::uint64_t points = grid.at("points").integer();
  if (points == 0) grid.at("points").fail("grid is empty");
  std::vector<double> out(points);
  for (std::uint64_t i = 0; i < points; ++i)
    out[i] = points == 1 ? start
                         : start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

}  // namespace belllab::cli
