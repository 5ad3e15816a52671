#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "belllab/analysis.hpp"
#include "belllab/couplings.hpp"
#include "belllab/pipeline.hpp"
#include "belllab/protocol.hpp"
#include "json_lines.hpp"

namespace belllab::cli {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

/// A schema violation at a JSON pointer inside a config document.
class ConfigError : public InputError {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : InputError(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Read-only cursor into a config document that remembers its JSON pointer.
class Node {
 public:
  Node(const Json& value, std::string pointer) : value_(&value), pointer_(std::move(pointer)) {}

  const Json& json() const { return *value_; }
  const std::string& pointer() const { return pointer_; }

  bool has(const std::string& key) const;
  Node at(const std::string& key) const;
  std::optional<Node> find(const std::string& key) const;
  Node at(std::size_t index) const;
  std::size_t size() const;

  double number() const;
  double number(double lo, double hi) const;
  std::uint64_t integer() const;
  std::int64_t signed_integer() const;
  std::string string() const;
  std::vector<double> numbers() const;
  std::vector<int> integers() const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  void expect_object() const;
  const Json* value_;
  std::string pointer_;
};

/// A loaded config document with its line index.
struct ConfigDocument {
  std::string path;
  std::string text;
  Json doc;
  JsonLineIndex lines{""};

  /// "path:line: /pointer: message"
  std::string locate(const ConfigError& e) const;
};

/// Reads and parses a config file; parse errors become ConfigError at the
/// offending line.
ConfigDocument load_config(const std::string& path);

std::uint64_t resolve_seed(const Node& root, std::optional<std::uint64_t> override_seed);

AngleAssignment parse_angles(const Node& root);
CouplingModel parse_model(const Node& model, const AngleAssignment& angles);
SourceProtocolConfig parse_source(const Node& source);
EventReadyConfig parse_event_ready(const Node& node);
std::array<double, 2> parse_setting_bias(const Node& root);
CoincidencePolicy parse_window(const Node& window);
PearleOptions parse_pearle_options(const Node& model);
std::vector<double> parse_grid(const Node& grid);

}  // namespace belllab::cli
