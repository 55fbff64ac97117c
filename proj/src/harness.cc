#include "bornrate/harness.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "bornrate/error.h"
#include "bornrate/philox.h"
#include "bornrate/text_format.h"

namespace bornrate {
namespace fs = std::filesystem;
namespace {

[[noreturn]] void ConfigError(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kInvalidParameter,
              "invalid parameter '" + key + "': " + why);
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "io: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "io: cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "io: write failed for " + path.string());
}

std::uint64_t GetUint(const nlohmann::json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_string()) {
    if (auto u = ParseUint(v.get<std::string>())) return *u;
  }
  ConfigError(key, "must be a non-negative integer");
}

double GetReal(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) ConfigError(key, "must be a number");
  return v.get<double>();
}

void CheckEfficiency(double e) {
  if (!(e >= 0.0 && e <= 1.0)) ConfigError("efficiency", "must lie in [0, 1]");
}

void CheckBins(std::int64_t m) {
  if (m < 1) ConfigError("bins", "M must be >= 1");
}

std::string Header(std::string_view key, std::string_view value) {
  return "# " + std::string(key) + "=" + std::string(value) + "\n";
}

nlohmann::json JsonNumberOrNull(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string RunId(std::uint64_t seed, std::int64_t bins, double e) {
  return "s" + std::to_string(seed) + "_M" + std::to_string(bins) + "_e" +
         FormatDouble(e);
}

std::string SeriesCsv(const std::vector<SeriesPoint>& points,
                      const std::vector<std::pair<std::string, std::string>>&
                          header) {
  std::string s;
  for (const auto& [k, v] : header) s += Header(k, v);
  s += "N,D\n";
  for (const auto& p : points) {
    s += std::to_string(p.n) + "," + FormatDouble(p.d) + "\n";
  }
  return s;
}

nlohmann::json FitJson(const Analysis& a, const std::string& run_id,
                       const std::string& config_hash, std::uint64_t seed,
                       std::int64_t bins, double e, std::uint64_t burn_in) {
  nlohmann::json j;
  j["run_id"] = run_id;
  j["tool"] = std::string(kToolVersion);
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["M"] = bins;
  j["e"] = e;
  j["burn_in"] = burn_in;
  j["alpha_hat"] = a.fit.alpha_hat;
  j["alpha_se"] = JsonNumberOrNull(a.fit.alpha_se);
  j["C_hat"] = a.fit.c_hat;
  j["r_squared"] = a.fit.r_squared;
  j["points_used"] = a.fit.points_used;
  j["zero_deviation_checkpoints"] = a.fit.zero_deviation_points;
  j["C_min_alpha1"] = a.bound_alpha1.c_min;
  j["C_trend_alpha1"] = a.bound_alpha1.c_trend;
  j["C_min_alpha05"] = a.bound_alpha05.c_min;
  j["C_trend_alpha05"] = a.bound_alpha05.c_trend;
  j["m_minus"] = JsonNumberOrNull(a.series.scheme.m_minus);
  j["m_plus"] = JsonNumberOrNull(a.series.scheme.m_plus);
  auto series = nlohmann::json::array();
  for (const auto& p : a.series.checkpoints) series.push_back({p.n, p.d});
  j["series"] = std::move(series);
  return j;
}

AnalyzeResult WriteAnalysis(const RunConfig& config, Analysis analysis,
                            const std::string& config_hash, std::uint64_t seed,
                            double e) {
  const std::int64_t bins = config.bins.front();
  AnalyzeResult result;
  result.series_path = config.out_dir / "series.csv";
  result.fit_path = config.out_dir / "fit.json";
  const auto& scheme = analysis.series.scheme;
  WriteTextFile(result.series_path,
                SeriesCsv(analysis.series.checkpoints,
                          {{"tool", std::string(kToolVersion)},
                           {"config_hash", config_hash},
                           {"seed", std::to_string(seed)},
                           {"M", std::to_string(bins)},
                           {"e", FormatDouble(e)},
                           {"m_minus", FormatDouble(scheme.m_minus)},
                           {"m_plus", FormatDouble(scheme.m_plus)}}));
  result.fit = FitJson(analysis, RunId(seed, bins, e), config_hash, seed, bins,
                       e, config.burn_in);
  WriteTextFile(result.fit_path, result.fit.dump(2) + "\n");
  result.analysis = std::move(analysis);
  return result;
}

std::string AnalysisHash(const RunConfig& config, std::string_view input) {
  nlohmann::json j;
  j["bins"] = config.bins;
  j["checkpoint_base"] = config.schedule.base;
  j["checkpoint_ratio"] = config.schedule.ratio;
  j["burn_in"] = config.burn_in;
  j["input"] = Hex64(Fnv1a64(input));
  return Hex64(Fnv1a64(j.dump()));
}

void RequireSingle(const RunConfig& config, std::string_view command) {
  if (config.bins.size() != 1) {
    ConfigError("bins", std::string(command) + " takes a single M");
  }
  if (config.efficiencies.size() != 1) {
    ConfigError("efficiency", std::string(command) + " takes a single e");
  }
}

const char* const kReportColumns =
    "run,N,D,log_N,log_D,alpha_hat,alpha_se,C_hat,r_squared,C_min_alpha1,"
    "C_trend_alpha1,C_min_alpha05,C_trend_alpha05,M,e,seed";

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (Classify(code)) {
    case ErrorClass::kConfig:
      return 2;
    case ErrorClass::kData:
      return 3;
    case ErrorClass::kIo:
      return 4;
  }
  return 1;
}

std::vector<std::int64_t> ParseIntList(std::string_view text) {
  std::vector<std::int64_t> out;
  for (const auto& item : SplitCsv(text)) {
    const auto v = ParseUint(item);
    if (!v || *v > static_cast<std::uint64_t>(
                       std::numeric_limits<std::int64_t>::max())) {
      ConfigError("bins", "expected a positive integer list, got '" +
                              std::string(text) + "'");
    }
    out.push_back(static_cast<std::int64_t>(*v));
  }
  return out;
}

std::vector<double> ParseRealList(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : SplitCsv(text)) {
    const auto v = ParseDouble(item);
    if (!v) {
      ConfigError("efficiency",
                  "expected a number list, got '" + std::string(text) + "'");
    }
    out.push_back(*v);
  }
  return out;
}

RunConfig ConfigFromJson(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) ConfigError("config", "must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "spec") {
      nlohmann::json spec = value;
      if (spec.is_object() && spec.contains("table_csv")) {
        if (!spec["table_csv"].is_string()) {
          ConfigError("table_csv", "must be a path");
        }
        fs::path p = spec["table_csv"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        std::istringstream in(ReadTextFile(p));
        auto rows = nlohmann::json::array();
        for (const auto& tp : ReadTableCsv(in)) {
          rows.push_back({tp.x, tp.intensity});
        }
        spec.erase("table_csv");
        spec["table"] = std::move(rows);
      }
      c.spec = SpecFromJson(spec);
    } else if (key == "efficiency") {
      c.efficiencies.clear();
      if (value.is_array()) {
        for (const auto& v : value) c.efficiencies.push_back(GetReal(v, key));
      } else {
        c.efficiencies.push_back(GetReal(value, key));
      }
    } else if (key == "bins") {
      c.bins.clear();
      if (value.is_array()) {
        for (const auto& v : value) {
          c.bins.push_back(static_cast<std::int64_t>(GetUint(v, key)));
        }
      } else {
        c.bins.push_back(static_cast<std::int64_t>(GetUint(value, key)));
      }
    } else if (key == "emitted") {
      c.emitted = GetUint(value, key);
    } else if (key == "seed") {
      c.seed = GetUint(value, key);
    } else if (key == "checkpoint_base") {
      c.schedule.base = GetUint(value, key);
    } else if (key == "checkpoint_ratio") {
      c.schedule.ratio = GetReal(value, key);
    } else if (key == "burn_in") {
      c.burn_in = GetUint(value, key);
    } else if (key == "replicas") {
      c.replicas = GetUint(value, key);
    } else if (key == "workers") {
      c.workers = static_cast<unsigned>(GetUint(value, key));
    } else if (key == "out") {
      if (!value.is_string()) ConfigError(key, "must be a path string");
      c.out_dir = value.get<std::string>();
    } else {
      ConfigError(key, "unknown config key");
    }
  }
  if (c.efficiencies.empty()) ConfigError("efficiency", "empty list");
  if (c.bins.empty()) ConfigError("bins", "empty list");
  for (double e : c.efficiencies) CheckEfficiency(e);
  for (auto m : c.bins) CheckBins(m);
  if (c.replicas < 1) ConfigError("replicas", "must be >= 1");
  if (c.schedule.base < 1) ConfigError("checkpoint_base", "must be >= 1");
  if (!(c.schedule.ratio > 1.0)) ConfigError("checkpoint_ratio", "must be > 1");
  BornDistribution::Validate(c.spec);
  return c;
}

RunConfig LoadConfig(const fs::path& path) {
  const std::string text = ReadTextFile(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'config': " + std::string(ex.what()));
  }
  return ConfigFromJson(j, path.has_parent_path() ? path.parent_path() : ".");
}

nlohmann::json ToJson(const RunConfig& config) {
  nlohmann::json j;
  j["spec"] = ToJson(config.spec);
  j["efficiency"] = config.efficiencies;
  j["emitted"] = config.emitted;
  j["seed"] = config.seed;
  j["bins"] = config.bins;
  j["checkpoint_base"] = config.schedule.base;
  j["checkpoint_ratio"] = config.schedule.ratio;
  j["burn_in"] = config.burn_in;
  j["replicas"] = config.replicas;
  j["workers"] = config.workers;
  j["out"] = config.out_dir.string();
  return j;
}

std::string ConfigHash(const RunConfig& config) {
  auto j = ToJson(config);
  j.erase("out");
  j.erase("workers");
  return Hex64(Fnv1a64(j.dump()));
}

SimulateResult RunSimulate(const RunConfig& config) {
  if (config.efficiencies.size() != 1) {
    ConfigError("efficiency", "simulate takes a single e");
  }
  const auto dist = BornDistribution::Validate(config.spec);
  const EventLog log = SampleEvents(
      dist, DetectorModel{config.efficiencies.front()}, config.emitted,
      config.seed);
  std::ostringstream os;
  WriteEventLog(os, log,
                {{"tool", std::string(kToolVersion)},
                 {"config_hash", ConfigHash(config)}});
  SimulateResult result;
  result.path = config.out_dir / "events.csv";
  result.recorded = log.events.size();
  WriteTextFile(result.path, os.str());
  return result;
}

AnalyzeResult RunAnalyze(const RunConfig& config, const fs::path& log_path) {
  if (config.bins.size() != 1) ConfigError("bins", "analyze takes a single M");
  const std::string text = ReadTextFile(log_path);
  std::istringstream in(text);
  const EventLog log = ReadEventLog(in);
  const auto dist = BornDistribution::Validate(log.spec);
  AnalysisOptions options;
  options.bins = config.bins.front();
  options.schedule = config.schedule;
  options.burn_in = config.burn_in;
  const auto xs = log.Positions();
  Analysis analysis =
      AnalyzePositions(xs, dist, options, log.detector.efficiency);
  return WriteAnalysis(config, std::move(analysis),
                       AnalysisHash(config, text), log.seed,
                       log.detector.efficiency);
}

std::vector<SeriesPoint> ReadSeriesCsv(std::istream& in) {
  std::vector<SeriesPoint> points;
  std::string line;
  int line_no = 0;
  bool have_columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto sv = Trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!have_columns) {
      if (sv != "N,D") {
        throw Error(ErrorCode::kParse, "parse: line " +
                                           std::to_string(line_no) +
                                           ": expected column header 'N,D'");
      }
      have_columns = true;
      continue;
    }
    const auto comma = sv.find(',');
    const auto n = comma == std::string_view::npos
                       ? std::nullopt
                       : ParseUint(sv.substr(0, comma));
    const auto d = comma == std::string_view::npos
                       ? std::nullopt
                       : ParseDouble(sv.substr(comma + 1));
    if (!n || !d || !(*d >= 0.0 && *d <= 1.0) ||
        (!points.empty() && *n <= points.back().n)) {
      throw Error(ErrorCode::kParse, "parse: line " + std::to_string(line_no) +
                                         ": bad series row");
    }
    points.push_back({*n, *d});
  }
  return points;
}

AnalyzeResult RunAnalyzeInjected(const RunConfig& config,
                                 const fs::path& series_path) {
  RequireSingle(config, "analyze");
  const std::string text = ReadTextFile(series_path);
  std::istringstream in(text);
  ConvergenceSeries series;
  series.checkpoints = ReadSeriesCsv(in);
  if (series.checkpoints.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "insufficient data: injected series is empty");
  }
  series.efficiency = config.efficiencies.front();
  series.scheme.m_minus = std::numeric_limits<double>::quiet_NaN();
  series.scheme.m_plus = std::numeric_limits<double>::quiet_NaN();
  series.scheme.bins = config.bins.front();
  Analysis analysis = AnalyzeSeries(std::move(series), config.burn_in);
  return WriteAnalysis(config, std::move(analysis), AnalysisHash(config, text),
                       config.seed, config.efficiencies.front());
}

SweepResult RunSweep(const RunConfig& config) {
  const auto dist = BornDistribution::Validate(config.spec);
  SweepOptions options;
  options.bins = config.bins;
  options.efficiencies = config.efficiencies;
  options.emitted = config.emitted;
  options.replicas = config.replicas;
  options.base_seed = config.seed;
  options.schedule = config.schedule;
  options.burn_in = config.burn_in;
  options.workers = config.workers;

  SweepResult result;
  result.cells = EfficiencySweep(dist, options);

  const std::string hash = ConfigHash(config);
  std::string head = Header("tool", kToolVersion) + Header("config_hash", hash) +
                     Header("seed", std::to_string(config.seed));
  std::string table = head +
                      "M,e,replicas,emitted,median_alpha_hat,"
                      "median_C_min_alpha1,median_C_min_alpha05,"
                      "median_final_D\n";
  std::string reps = head +
                     "M,e,replica,seed,recorded,alpha_hat,alpha_se,C_hat,"
                     "r_squared,C_min_alpha1,C_trend_alpha1,C_min_alpha05,"
                     "C_trend_alpha05,final_D\n";
  for (const auto& cell : result.cells) {
    table += std::to_string(cell.bins) + "," + FormatDouble(cell.efficiency) +
             "," + std::to_string(config.replicas) + "," +
             std::to_string(config.emitted) + "," +
             FormatDouble(cell.median_alpha_hat) + "," +
             FormatDouble(cell.median_c_min_alpha1) + "," +
             FormatDouble(cell.median_c_min_alpha05) + "," +
             FormatDouble(cell.median_final_d) + "\n";
    for (const auto& r : cell.replicas) {
      const auto& a = r.analysis;
      reps += std::to_string(cell.bins) + "," + FormatDouble(cell.efficiency) +
              "," + std::to_string(r.replica) + "," + std::to_string(r.seed) +
              "," + std::to_string(r.recorded) + "," +
              FormatDouble(a.fit.alpha_hat) + "," +
              FormatDouble(a.fit.alpha_se) + "," + FormatDouble(a.fit.c_hat) +
              "," + FormatDouble(a.fit.r_squared) + "," +
              FormatDouble(a.bound_alpha1.c_min) + "," +
              FormatDouble(a.bound_alpha1.c_trend) + "," +
              FormatDouble(a.bound_alpha05.c_min) + "," +
              FormatDouble(a.bound_alpha05.c_trend) + "," +
              FormatDouble(a.series.checkpoints.back().d) + "\n";
    }
  }
  result.table_path = config.out_dir / "sweep.csv";
  result.replicas_path = config.out_dir / "sweep_replicas.csv";
  WriteTextFile(result.table_path, table);
  WriteTextFile(result.replicas_path, reps);
  return result;
}

fs::path RunReport(const std::vector<fs::path>& inputs, const fs::path& out_dir) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'inputs': report needs at least one file");
  }
  const auto columns = SplitCsv(kReportColumns);
  std::set<std::string> used_ids;
  auto unique_id = [&used_ids](std::string id) {
    std::string candidate = id;
    for (int k = 2; used_ids.count(candidate); ++k) {
      candidate = id + "_" + std::to_string(k);
    }
    used_ids.insert(candidate);
    return candidate;
  };
  auto schema_error = [](const fs::path& p, const std::string& why) {
    return Error(ErrorCode::kSchema,
                 "schema: " + p.string() + ": " + why);
  };

  std::string rows;
  std::string input_digest;
  for (const auto& path : inputs) {
    const std::string text = ReadTextFile(path);
    input_digest += Hex64(Fnv1a64(text));
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      nlohmann::json fit;
      try {
        fit = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& ex) {
        throw schema_error(path, ex.what());
      }
      try {
        const std::string run = unique_id(
            fit.contains("run_id") ? fit.at("run_id").get<std::string>()
                                   : path.stem().string());
        auto num = [&fit](const char* key) {
          const auto& v = fit.at(key);
          return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                             : v.get<double>();
        };
        std::string tail;
        for (const char* key :
             {"alpha_hat", "alpha_se", "C_hat", "r_squared", "C_min_alpha1",
              "C_trend_alpha1", "C_min_alpha05", "C_trend_alpha05"}) {
          tail += "," + FormatDouble(num(key));
        }
        tail += "," + std::to_string(fit.at("M").get<std::int64_t>());
        tail += "," + FormatDouble(fit.at("e").get<double>());
        tail += "," + std::to_string(fit.at("seed").get<std::uint64_t>());
        const auto& series = fit.at("series");
        if (!series.is_array() || series.empty()) {
          throw schema_error(path, "missing series");
        }
        for (const auto& p : series) {
          const auto n = p.at(0).get<std::uint64_t>();
          const double d = p.at(1).get<double>();
          rows += run + "," + std::to_string(n) + "," + FormatDouble(d) + "," +
                  FormatDouble(std::log(static_cast<double>(n))) + "," +
                  FormatDouble(std::log(d)) + tail + "\n";
        }
      } catch (const nlohmann::json::exception& ex) {
        throw schema_error(path, std::string("fit json: ") + ex.what());
      }
      continue;
    }
    // A previous report: rows pass through with run ids kept unique.
    std::istringstream in(text);
    std::string line;
    bool have_columns = false;
    std::map<std::string, std::string> renamed;
    while (std::getline(in, line)) {
      const auto sv = Trim(line);
      if (sv.empty() || sv.front() == '#') continue;
      if (!have_columns) {
        if (sv != kReportColumns) throw schema_error(path, "unknown columns");
        have_columns = true;
        continue;
      }
      auto fields = SplitCsv(sv);
      if (fields.size() != columns.size()) {
        throw schema_error(path, "wrong field count");
      }
      auto it = renamed.find(fields[0]);
      if (it == renamed.end()) {
        it = renamed.emplace(fields[0], unique_id(fields[0])).first;
      }
      fields[0] = it->second;
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) joined += ",";
        joined += fields[i];
      }
      rows += joined + "\n";
    }
    if (!have_columns) throw schema_error(path, "not a fit JSON or report CSV");
  }
  const fs::path out = out_dir / "report.csv";
  WriteTextFile(out, Header("tool", kToolVersion) +
                         Header("inputs_hash", Hex64(Fnv1a64(input_digest))) +
                         kReportColumns + "\n" + rows);
  return out;
}

}  // namespace bornrate
