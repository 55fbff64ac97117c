#ifndef BORNRATE_BINNING_H_
#define BORNRATE_BINNING_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "bornrate/sampler.h"

namespace bornrate {

// M equal interior bins on [m_minus, m_plus] plus the two outer regions
// (-inf, m_minus) and (m_plus, +inf), which are empty by construction.
struct BinningScheme {
  double m_minus = 0.0;
  double m_plus = 1.0;
  std::int64_t bins = 1;  // M
  double delta_ell = 1.0;

  // Upper edge of bin j, j = 1..M. Edge M is m_plus exactly.
  double UpperEdge(std::int64_t j) const;
  std::vector<double> UpperEdges() const;

  friend bool operator==(const BinningScheme&, const BinningScheme&) = default;
};

// Builds a scheme from explicit edges. Throws Error(kInvalidParameter).
BinningScheme MakeScheme(double m_minus, double m_plus, std::int64_t bins);

// Tightest admissible scheme: m_minus and m_plus are the sample min and max.
// Throws Error(kDegenerateData) with fewer than two distinct positions and
// Error(kInvalidParameter) for bins < 1.
BinningScheme ChooseBinning(std::span<const double> positions,
                            std::int64_t bins);
BinningScheme ChooseBinning(const EventLog& log, std::int64_t bins);

// Index 0 is the lower outer region, M + 1 the upper one.
constexpr std::int64_t kOuterLow = 0;

// Interior bins are half-open [lower, upper) except bin M, which is closed,
// so m_minus maps to 1 and m_plus maps to M. NaN maps to the upper region.
std::int64_t BinIndex(const BinningScheme& scheme, double x);

class BinnedCounts {
 public:
  explicit BinnedCounts(BinningScheme scheme);

  const BinningScheme& scheme() const { return scheme_; }
  // counts()[j - 1] is N_j.
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t total() const { return total_; }

  // Throws Error(kOuterRegionViolation) for x outside [m_minus, m_plus].
  void Add(double x);
  // Elementwise merge; schemes must match (Error(kInvalidParameter)).
  BinnedCounts& operator+=(const BinnedCounts& other);

  static BinnedCounts FromCounts(BinningScheme scheme,
                                 std::vector<std::uint64_t> counts);

  friend bool operator==(const BinnedCounts&, const BinnedCounts&) = default;

 private:
  BinningScheme scheme_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

BinnedCounts BinEvents(std::span<const double> positions,
                       const BinningScheme& scheme);
BinnedCounts BinEvents(std::span<const DetectionEvent> events,
                       const BinningScheme& scheme);

// Normalized measured cdf at the M upper edges. The values are integer
// partial sums divided once by N; the common bin width never enters.
struct EmpiricalCdf {
  std::vector<double> edges;
  std::vector<double> values;
};

// Throws Error(kInsufficientData) when the total is zero.
EmpiricalCdf MakeEmpiricalCdf(const BinnedCounts& counts);

// CSV `bin,lower_edge,upper_edge,count` with the scheme in '#' comments.
void WriteBinnedCounts(std::ostream& out, const BinnedCounts& counts);
BinnedCounts ReadBinnedCounts(std::istream& in);

}  // namespace bornrate

#endif  // BORNRATE_BINNING_H_
