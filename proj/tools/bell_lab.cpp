#include <iostream>

#include <CLI11.hpp>

#include "belllab/types.hpp"
#include "cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace belllab::cli;
  CLI::App app{"bell_lab: Bell-test simulation and analysis"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string format = "csv";
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON config file");
    sub->add_option("--seed", opts.seed, "Seed (overrides the config)");
    sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* simulate = app.add_subcommand("simulate", "Run an event-ready, source or model-trials simulation");
  common(simulate);
  auto* analyze = app.add_subcommand("analyze", "Analyze trials or time tags into report.json");
  common(analyze);
  analyze->add_option("--input", opts.input, "Directory written by simulate");
  analyze->add_option("--window", opts.window_ns, "Coincidence window in ns");
  analyze->add_option("--strategy", opts.strategy, "fixed_lattice or greedy_nearest");
  auto* sweep = app.add_subcommand("sweep", "Theta or window sweep");
  common(sweep);
  auto* feasibility = app.add_subcommand("feasibility", "Joint-distribution feasibility of 4 pairwise tables");
  common(feasibility);
  feasibility->add_option("--input", opts.input, "Table JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opts.format = format == "json" ? OutputFormat::kJson : OutputFormat::kCsv;

  try {
    if (simulate->parsed()) return cmd_simulate(opts, std::cerr);
    if (analyze->parsed()) return cmd_analyze(opts, std::cerr);
    if (sweep->parsed()) return cmd_sweep(opts, std::cerr);
    return cmd_feasibility(opts, std::cerr);
  } catch (const belllab::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const belllab::InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
