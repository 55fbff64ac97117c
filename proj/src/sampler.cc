#include "bornrate/sampler.h"

#include <algorithm>
#include <cmath>
#include <string_view>

#include "bornrate/error.h"
#include "bornrate/philox.h"
#include "bornrate/text_format.h"

namespace bornrate {

std::vector<double> EventLog::Positions() const {
  std::vector<double> xs;
  xs.reserve(events.size());
  for (const auto& ev : events) xs.push_back(ev.x);
  return xs;
}

EventLog SampleEvents(const BornDistribution& dist, DetectorModel detector,
                      std::uint64_t emitted_count, std::uint64_t seed) {
  const double e = detector.efficiency;
  if (!(e >= 0.0 && e <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'efficiency': must lie in [0, 1]");
  }
  EventLog log;
  log.seed = seed;
  log.spec = dist.spec();
  log.detector = detector;
  log.emitted_count = emitted_count;
  log.rng = std::string(Philox4x64::kAlgorithmId);
  if (e > 0.0) {
    log.events.reserve(static_cast<std::size_t>(
        std::ceil(e * static_cast<double>(emitted_count))));
  }
  for (std::uint64_t i = 0; i < emitted_count; ++i) {
    if (e < 1.0 && !(DrawUniform(seed, Substream::kThinning, i) < e)) {
      continue;
    }
    const double u = DrawUniform(seed, Substream::kPosition, i);
    log.events.push_back({log.events.size() + 1, dist.Quantile(u)});
  }
  return log;
}

double KolmogorovDistance(std::span<const double> positions,
                          const BornDistribution& dist) {
  if (positions.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "insufficient data: empty sample");
  }
  std::vector<double> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = dist.Cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(above, below));
  }
  return d;
}

double DkwBand(std::uint64_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

GoodnessOfFit CheckGoodnessOfFit(const EventLog& log,
                                 const BornDistribution& dist) {
  GoodnessOfFit report;
  const auto xs = log.Positions();
  report.d_raw = KolmogorovDistance(xs, dist);
  report.n = xs.size();
  report.dkw_band = DkwBand(report.n, 0.001);
  report.within_band = report.d_raw <= report.dkw_band;
  return report;
}

void WriteEventLog(
    std::ostream& out, const EventLog& log,
    const std::vector<std::pair<std::string, std::string>>& extra_header) {
  for (const auto& [key, value] : extra_header) {
    out << "# " << key << '=' << value << '\n';
  }
  out << "# seed=" << log.seed << '\n';
  out << "# e=" << FormatDouble(log.detector.efficiency) << '\n';
  out << "# spec=" << ToJson(log.spec).dump() << '\n';
  out << "# emitted=" << log.emitted_count << '\n';
  out << "# rng=" << log.rng << '\n';
  out << "seq,x\n";
  for (const auto& ev : log.events) {
    out << ev.seq << ',' << FormatDouble(ev.x) << '\n';
  }
}

namespace {

[[noreturn]] void ParseFail(int line_no, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "parse: line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

EventLog ReadEventLog(std::istream& in) {
  EventLog log;
  bool have_seed = false, have_e = false, have_spec = false,
       have_emitted = false, have_columns = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = Trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      if (have_columns) ParseFail(line_no, "header after data");
      sv = Trim(sv.substr(1));
      const auto eq = sv.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = Trim(sv.substr(0, eq));
      const auto value = Trim(sv.substr(eq + 1));
      if (key == "seed") {
        const auto v = ParseUint(value);
        if (!v) ParseFail(line_no, "bad seed");
        log.seed = *v;
        have_seed = true;
      } else if (key == "e") {
        const auto v = ParseDouble(value);
        if (!v || !(*v >= 0.0 && *v <= 1.0)) ParseFail(line_no, "bad e");
        log.detector.efficiency = *v;
        have_e = true;
      } else if (key == "spec") {
        try {
          log.spec = SpecFromJson(nlohmann::json::parse(value));
        } catch (const nlohmann::json::exception& ex) {
          ParseFail(line_no, std::string("bad spec json: ") + ex.what());
        } catch (const Error& ex) {
          ParseFail(line_no, ex.what());
        }
        have_spec = true;
      } else if (key == "emitted") {
        const auto v = ParseUint(value);
        if (!v) ParseFail(line_no, "bad emitted count");
        log.emitted_count = *v;
        have_emitted = true;
      } else if (key == "rng") {
        log.rng = std::string(value);
      }
      continue;
    }
    if (!have_columns) {
      if (sv != "seq,x") ParseFail(line_no, "expected column header 'seq,x'");
      if (!(have_seed && have_e && have_spec && have_emitted)) {
        ParseFail(line_no, "missing seed/e/spec/emitted header");
      }
      have_columns = true;
      continue;
    }
    const auto comma = sv.find(',');
    if (comma == std::string_view::npos) ParseFail(line_no, "expected 'seq,x'");
    const auto seq = ParseUint(sv.substr(0, comma));
    const auto x = ParseDouble(sv.substr(comma + 1));
    if (!seq || !x || !std::isfinite(*x)) ParseFail(line_no, "bad row");
    if (*seq != log.events.size() + 1) ParseFail(line_no, "seq gap");
    log.events.push_back({*seq, *x});
  }
  if (!have_columns) {
    ParseFail(line_no, "missing header or 'seq,x' column line");
  }
  if (log.events.size() > log.emitted_count) {
    ParseFail(line_no, "more events than emitted");
  }
  return log;
}

}  // namespace bornrate
