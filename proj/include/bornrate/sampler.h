#ifndef BORNRATE_SAMPLER_H_
#define BORNRATE_SAMPLER_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bornrate/wavefunction.h"

namespace bornrate {

struct DetectorModel {
  // Probability that an emitted particle is recorded, in [0, 1].
  double efficiency = 1.0;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

struct DetectionEvent {
  std::uint64_t seq = 0;  // 1-based detection order
  double x = 0.0;

  friend bool operator==(const DetectionEvent&,
                         const DetectionEvent&) = default;
};

// The raw experiment record. N in the convergence statistics is
// events.size(), the recorded count; emitted_count is bookkeeping.
struct EventLog {
  std::vector<DetectionEvent> events;
  std::uint64_t seed = 0;
  WavefunctionSpec spec;
  DetectorModel detector;
  std::uint64_t emitted_count = 0;
  std::string rng = "philox4x64-10";

  std::vector<double> Positions() const;

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

// Draws emitted_count particles by inverse-transform sampling (one uniform
// per particle from the position substream) and keeps each with
// probability e using an independent thinning substream. Positions of
// surviving particles therefore do not depend on e.
EventLog SampleEvents(const BornDistribution& dist, DetectorModel detector,
                      std::uint64_t emitted_count, std::uint64_t seed);

struct GoodnessOfFit {
  double d_raw = 0.0;  // sup |F_raw - F_B| over the unbinned step cdf
  std::uint64_t n = 0;
  double dkw_band = 0.0;  // 99.9% DKW half-width sqrt(ln(2/0.001) / 2n)
  bool within_band = false;
};

// Two-sided Kolmogorov distance of the positions from dist's cdf.
// Throws Error(kInsufficientData) for an empty sample.
double KolmogorovDistance(std::span<const double> positions,
                          const BornDistribution& dist);

// Half-width eps with P(sup |F_n - F| > eps) <= alpha under DKW.
double DkwBand(std::uint64_t n, double alpha);

GoodnessOfFit CheckGoodnessOfFit(const EventLog& log,
                                 const BornDistribution& dist);

// Event log text format:
//   # seed=<u64>
//   # e=<decimal>
//   # spec=<json>
//   # emitted=<int>
//   # rng=<algorithm id>
//   seq,x
//   <seq>,<x, shortest round-trip form>
// `extra_header` lines are written first as "# key=value" and ignored on read.
void WriteEventLog(
    std::ostream& out, const EventLog& log,
    const std::vector<std::pair<std::string, std::string>>& extra_header = {});
// Throws Error(kParse) with the offending line number.
EventLog ReadEventLog(std::istream& in);

}  // namespace bornrate

#endif  // BORNRATE_SAMPLER_H_
