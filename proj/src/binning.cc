#include "bornrate/binning.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "bornrate/error.h"
#include "bornrate/text_format.h"

namespace bornrate {

double BinningScheme::UpperEdge(std::int64_t j) const {
  if (j <= 0) return m_minus;
  if (j >= bins) return m_plus;
  return m_minus + static_cast<double>(j) * delta_ell;
}

std::vector<double> BinningScheme::UpperEdges() const {
  std::vector<double> edges(static_cast<std::size_t>(bins));
  for (std::int64_t j = 1; j <= bins; ++j) {
    edges[static_cast<std::size_t>(j - 1)] = UpperEdge(j);
  }
  return edges;
}

BinningScheme MakeScheme(double m_minus, double m_plus, std::int64_t bins) {
  if (bins < 1) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'bins': M must be >= 1");
  }
  if (!(std::isfinite(m_minus) && std::isfinite(m_plus) && m_minus < m_plus)) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter: need finite m_minus < m_plus");
  }
  BinningScheme s;
  s.m_minus = m_minus;
  s.m_plus = m_plus;
  s.bins = bins;
  s.delta_ell = (m_plus - m_minus) / static_cast<double>(bins);
  if (!(s.delta_ell > 0.0)) {
    throw Error(ErrorCode::kDegenerateData,
                "degenerate data: bin width underflows");
  }
  return s;
}

BinningScheme ChooseBinning(std::span<const double> positions,
                            std::int64_t bins) {
  if (bins < 1) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'bins': M must be >= 1");
  }
  if (positions.empty()) {
    throw Error(ErrorCode::kDegenerateData,
                "degenerate data: no events to bin");
  }
  const auto [lo, hi] = std::minmax_element(positions.begin(), positions.end());
  if (!(*lo < *hi)) {
    throw Error(ErrorCode::kDegenerateData,
                "degenerate data: fewer than two distinct positions");
  }
  return MakeScheme(*lo, *hi, bins);
}

BinningScheme ChooseBinning(const EventLog& log, std::int64_t bins) {
  const auto xs = log.Positions();
  return ChooseBinning(xs, bins);
}

std::int64_t BinIndex(const BinningScheme& scheme, double x) {
  if (x < scheme.m_minus) return kOuterLow;
  if (!(x <= scheme.m_plus)) return scheme.bins + 1;
  const double r = std::floor((x - scheme.m_minus) / scheme.delta_ell);
  auto j = static_cast<std::int64_t>(
               std::clamp(r, 0.0, static_cast<double>(scheme.bins - 1))) +
           1;
  // The division can land one cell off near an edge; settle against the
  // edge values themselves.
  while (j > 1 && x < scheme.UpperEdge(j - 1)) --j;
  while (j < scheme.bins && x >= scheme.UpperEdge(j)) ++j;
  return j;
}

BinnedCounts::BinnedCounts(BinningScheme scheme)
    : scheme_(std::move(scheme)),
      counts_(static_cast<std::size_t>(scheme_.bins), 0) {}

void BinnedCounts::Add(double x) {
  const std::int64_t j = BinIndex(scheme_, x);
  if (j < 1 || j > scheme_.bins) {
    throw Error(ErrorCode::kOuterRegionViolation,
                "outer-region violation: event at x=" + FormatDouble(x) +
                    " lies outside [m_minus, m_plus]");
  }
  ++counts_[static_cast<std::size_t>(j - 1)];
  ++total_;
}

BinnedCounts& BinnedCounts::operator+=(const BinnedCounts& other) {
  if (!(scheme_ == other.scheme_)) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter: merging counts from different schemes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
  total_ += other.total_;
  return *this;
}

BinnedCounts BinnedCounts::FromCounts(BinningScheme scheme,
                                      std::vector<std::uint64_t> counts) {
  if (counts.size() != static_cast<std::size_t>(scheme.bins)) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter: count array length differs from M");
  }
  BinnedCounts out(std::move(scheme));
  out.counts_ = std::move(counts);
  out.total_ = 0;
  for (auto c : out.counts_) out.total_ += c;
  return out;
}

BinnedCounts BinEvents(std::span<const double> positions,
                       const BinningScheme& scheme) {
  BinnedCounts counts(scheme);
  for (double x : positions) counts.Add(x);
  return counts;
}

BinnedCounts BinEvents(std::span<const DetectionEvent> events,
                       const BinningScheme& scheme) {
  BinnedCounts counts(scheme);
  for (const auto& ev : events) counts.Add(ev.x);
  return counts;
}

EmpiricalCdf MakeEmpiricalCdf(const BinnedCounts& counts) {
  if (counts.total() == 0) {
    throw Error(ErrorCode::kInsufficientData,
                "insufficient data: no events in the binned counts");
  }
  EmpiricalCdf emp;
  emp.edges = counts.scheme().UpperEdges();
  emp.values.resize(emp.edges.size());
  const double n = static_cast<double>(counts.total());
  std::uint64_t partial = 0;
  const auto c = counts.counts();
  for (std::size_t j = 0; j < c.size(); ++j) {
    partial += c[j];
    emp.values[j] = static_cast<double>(partial) / n;
  }
  return emp;
}

void WriteBinnedCounts(std::ostream& out, const BinnedCounts& counts) {
  const auto& s = counts.scheme();
  out << "# m_minus=" << FormatDouble(s.m_minus) << '\n';
  out << "# m_plus=" << FormatDouble(s.m_plus) << '\n';
  out << "# M=" << s.bins << '\n';
  out << "# delta_ell=" << FormatDouble(s.delta_ell) << '\n';
  out << "bin,lower_edge,upper_edge,count\n";
  const auto c = counts.counts();
  for (std::int64_t j = 1; j <= s.bins; ++j) {
    out << j << ',' << FormatDouble(s.UpperEdge(j - 1)) << ','
        << FormatDouble(s.UpperEdge(j)) << ','
        << c[static_cast<std::size_t>(j - 1)] << '\n';
  }
}

BinnedCounts ReadBinnedCounts(std::istream& in) {
  std::optional<double> m_minus, m_plus;
  std::optional<std::uint64_t> bins;
  std::vector<std::uint64_t> counts;
  bool have_columns = false;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kParse,
                "parse: line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = Trim(line);
    if (sv.empty()) continue;
    if (sv.front() == '#') {
      sv = Trim(sv.substr(1));
      const auto eq = sv.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = Trim(sv.substr(0, eq));
      const auto value = sv.substr(eq + 1);
      if (key == "m_minus") m_minus = ParseDouble(value);
      if (key == "m_plus") m_plus = ParseDouble(value);
      if (key == "M") bins = ParseUint(value);
      continue;
    }
    if (!have_columns) {
      if (sv != "bin,lower_edge,upper_edge,count") fail("bad column header");
      have_columns = true;
      continue;
    }
    const auto last = sv.rfind(',');
    const auto first = sv.find(',');
    if (last == std::string_view::npos) fail("expected 4 columns");
    const auto bin = ParseUint(sv.substr(0, first));
    const auto count = ParseUint(sv.substr(last + 1));
    if (!bin || !count || *bin != counts.size() + 1) fail("bad row");
    counts.push_back(*count);
  }
  if (!m_minus || !m_plus || !bins) fail("missing scheme header");
  auto scheme = MakeScheme(*m_minus, *m_plus, static_cast<std::int64_t>(*bins));
  if (counts.size() != *bins) fail("row count differs from M");
  return BinnedCounts::FromCounts(scheme, std::move(counts));
}

}  // namespace bornrate
