#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace belllab::cli {

enum class OutputFormat { kCsv, kJson };

struct CommandOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  OutputFormat format = OutputFormat::kCsv;
  std::optional<std::string> input;
  std::optional<std::int64_t> window_ns;
  std::optional<std::string> strategy;
};

// Each command writes into options.out and returns the exit code.  Input and
// config problems throw InputError; broken invariants throw InvariantError.
// Warnings go to `log`.

int cmd_simulate(const CommandOptions& options, std::ostream& log);
int cmd_analyze(const CommandOptions& options, std::ostream& log);
int cmd_sweep(const CommandOptions& options, std::ostream& log);
int cmd_feasibility(const CommandOptions& options, std::ostream& log);

}  // namespace belllab::cli
