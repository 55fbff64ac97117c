#ifndef BORNRATE_HARNESS_H_
#define BORNRATE_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bornrate/convergence.h"
#include "bornrate/error.h"
#include "bornrate/sampler.h"
#include "bornrate/wavefunction.h"
#include "json.hpp"

namespace bornrate {

inline constexpr std::string_view kToolVersion = "bornrate 0.1.0";

struct RunConfig {
  WavefunctionSpec spec = WavefunctionSpec::Gaussian(1.0, 8.0);
  std::vector<double> efficiencies{1.0};
  std::uint64_t emitted = 100000;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> bins{64};
  CheckpointSchedule schedule;
  std::uint64_t burn_in = 100;
  std::uint64_t replicas = 1;
  unsigned workers = 1;
  std::filesystem::path out_dir = ".";
};

// Keys: spec, efficiency (number or list), emitted, seed, bins (int or
// list), checkpoint_base, checkpoint_ratio, burn_in, replicas, workers, out.
// A spec may give "table_csv" instead of "table"; the path is resolved
// against base_dir. Unknown keys are rejected with Error(kInvalidParameter).
RunConfig ConfigFromJson(const nlohmann::json& j,
                         const std::filesystem::path& base_dir = ".");
RunConfig LoadConfig(const std::filesystem::path& path);
nlohmann::json ToJson(const RunConfig& config);

// Hash of everything that affects artifacts (out and workers excluded).
std::string ConfigHash(const RunConfig& config);

// Parses "8" or "8,16,64" style lists.
std::vector<std::int64_t> ParseIntList(std::string_view text);
std::vector<double> ParseRealList(std::string_view text);

struct SimulateResult {
  std::filesystem::path path;
  std::uint64_t recorded = 0;
};
// Writes <out>/events.csv for the first efficiency in the config.
SimulateResult RunSimulate(const RunConfig& config);

struct AnalyzeResult {
  std::filesystem::path series_path;
  std::filesystem::path fit_path;
  Analysis analysis;
  nlohmann::json fit;
};
// Reads an event log, writes <out>/series.csv and <out>/fit.json.
AnalyzeResult RunAnalyze(const RunConfig& config,
                         const std::filesystem::path& log_path);
// Test mode: skips sampling and binning and fits a given `N,D` series CSV.
AnalyzeResult RunAnalyzeInjected(const RunConfig& config,
                                 const std::filesystem::path& series_path);

// Series CSV: '#' header comments, `N,D`, rows.
std::vector<SeriesPoint> ReadSeriesCsv(std::istream& in);

struct SweepResult {
  std::filesystem::path table_path;     // <out>/sweep.csv
  std::filesystem::path replicas_path;  // <out>/sweep_replicas.csv
  std::vector<SweepCell> cells;
};
SweepResult RunSweep(const RunConfig& config);

// Merges fit JSONs (or earlier report CSVs) into one long-format CSV with
// columns run,N,D,log_N,log_D followed by the fit parameters. Throws
// Error(kSchema) for inputs of any other shape.
std::filesystem::path RunReport(const std::vector<std::filesystem::path>& inputs,
                                const std::filesystem::path& out_dir);

// Exit codes: 0 success, 2 config, 3 data, 4 I/O.
int ExitCodeFor(ErrorCode code);

}  // namespace bornrate

#endif  // BORNRATE_HARNESS_H_
