// bornrate: simulate detection logs, analyze their convergence to the Born
// cdf, sweep (M, e) grids and merge fit reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bornrate/error.h"
#include "bornrate/harness.h"
#include "bornrate/text_format.h"

namespace {

using bornrate::Error;
using bornrate::ErrorCode;
using bornrate::RunConfig;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> bins;
  std::optional<std::string> efficiency;
  std::optional<std::uint64_t> emitted;
  std::optional<std::uint64_t> checkpoint_base;
  std::optional<double> checkpoint_ratio;
  std::optional<std::uint64_t> burn_in;
  std::optional<std::uint64_t> replicas;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
};

void AddRunFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Base seed (u64)");
  cmd->add_option("--bins", o.bins, "M, or a comma list for sweep");
  cmd->add_option("--efficiency", o.efficiency,
                  "Detector efficiency e, or a comma list for sweep");
  cmd->add_option("--emitted", o.emitted, "Emitted particle count");
  cmd->add_option("--checkpoint-base", o.checkpoint_base, "First checkpoint N_0");
  cmd->add_option("--checkpoint-ratio", o.checkpoint_ratio,
                  "Geometric checkpoint ratio r");
  cmd->add_option("--burn-in", o.burn_in,
                  "Checkpoints with N below this are left out of the fit");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Worker threads for sweeps");
}

RunConfig Resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : bornrate::LoadConfig(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.bins) c.bins = bornrate::ParseIntList(*o.bins);
  if (o.efficiency) c.efficiencies = bornrate::ParseRealList(*o.efficiency);
  if (o.emitted) c.emitted = *o.emitted;
  if (o.checkpoint_base) c.schedule.base = *o.checkpoint_base;
  if (o.checkpoint_ratio) c.schedule.ratio = *o.checkpoint_ratio;
  if (o.burn_in) c.burn_in = *o.burn_in;
  if (o.replicas) c.replicas = *o.replicas;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.out_dir = *o.out;
  // Re-run the config checks on the merged result.
  return bornrate::ConfigFromJson(bornrate::ToJson(c));
}

int Fail(int exit_code, std::string_view id, std::string_view message) {
  if (message.starts_with(id) && message.substr(id.size()).starts_with(": ")) {
    message.remove_prefix(id.size() + 2);
  }
  std::cerr << "E" << exit_code << ":" << id << ": " << message << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Born-rule convergence harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bornrate::kToolVersion));

  Overrides sim, ana, swp;
  auto* simulate = app.add_subcommand("simulate", "Sample an event log");
  AddRunFlags(simulate, sim);

  auto* analyze =
      app.add_subcommand("analyze", "Convergence series and rate fit of a log");
  AddRunFlags(analyze, ana);
  std::string log_path;
  std::string injected;
  analyze->add_option("log", log_path, "Event log CSV");
  analyze->add_option("--inject-series", injected,
                      "Fit an N,D series CSV directly (test mode)");

  auto* sweep = app.add_subcommand("sweep", "Replicated (M, e) sweep");
  AddRunFlags(sweep, swp);
  sweep->add_option("--replicas", swp.replicas, "Replicas per cell");

  auto* report = app.add_subcommand("report", "Merge fit JSONs into one CSV");
  std::vector<std::string> inputs;
  std::string report_out = ".";
  report->add_option("inputs", inputs, "fit.json or report.csv files")
      ->required();
  report->add_option("--out", report_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Fail(2, "usage", e.what());
  }

  try {
    if (*simulate) {
      const auto result = bornrate::RunSimulate(Resolve(sim));
      std::cout << "recorded N=" << result.recorded << " path="
                << result.path.string() << "\n";
    } else if (*analyze) {
      const RunConfig config = Resolve(ana);
      bornrate::AnalyzeResult result;
      if (!injected.empty()) {
        result = bornrate::RunAnalyzeInjected(config, injected);
      } else if (!log_path.empty()) {
        result = bornrate::RunAnalyze(config, log_path);
      } else {
        return Fail(2, "usage", "analyze needs an event log or --inject-series");
      }
      const auto& a = result.analysis;
      std::cout << "alpha_hat=" << bornrate::FormatDouble(a.fit.alpha_hat)
                << " C_min_alpha1="
                << bornrate::FormatDouble(a.bound_alpha1.c_min)
                << " C_min_alpha05="
                << bornrate::FormatDouble(a.bound_alpha05.c_min) << "\n"
                << "series=" << result.series_path.string()
                << " fit=" << result.fit_path.string() << "\n";
    } else if (*sweep) {
      const auto result = bornrate::RunSweep(Resolve(swp));
      std::cout << "cells=" << result.cells.size()
                << " table=" << result.table_path.string() << "\n";
    } else if (*report) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      const auto out = bornrate::RunReport(paths, report_out);
      std::cout << "report=" << out.string() << "\n";
    }
  } catch (const Error& e) {
    return Fail(bornrate::ExitCodeFor(e.code()), bornrate::ToString(e.code()),
                e.what());
  } catch (const std::exception& e) {
    return Fail(3, "internal", e.what());
  }
  return 0;
}
