#ifndef BORNRATE_CONVERGENCE_H_
#define BORNRATE_CONVERGENCE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bornrate/binning.h"
#include "bornrate/sampler.h"
#include "bornrate/wavefunction.h"

namespace bornrate {

// Geometric prefix sizes N_k = round(base * ratio^k), capped at N, plus N.
struct CheckpointSchedule {
  std::uint64_t base = 10;
  double ratio = 2.0;
};

// Strictly increasing, deduplicated, always ending at n. ratio^k is built by
// repeated multiplication so the schedule is identical on every IEEE-754
// platform. Throws Error(kInvalidParameter) for base < 1 or ratio <= 1 and
// Error(kInsufficientData) when n < base.
std::vector<std::uint64_t> Checkpoints(const CheckpointSchedule& schedule,
                                       std::uint64_t n);

struct SeriesPoint {
  std::uint64_t n = 0;
  double d = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct ConvergenceSeries {
  std::vector<SeriesPoint> checkpoints;
  BinningScheme scheme;
  double efficiency = 1.0;
};

// max_j |values[j] - reference[j]| over the M upper edges.
double SupDeviation(const EmpiricalCdf& emp,
                    std::span<const double> reference_at_edges);
double SupDeviation(const EmpiricalCdf& emp, const BornDistribution& dist);

// The x = +inf term: the measured cdf past m_plus (the upper outer region
// is empty, so this is the value at edge M) against F_B at +L.
double TerminalDeviation(const EmpiricalCdf& emp, const BornDistribution& dist);

// Bins are chosen once from all positions and reused for every prefix.
ConvergenceSeries BuildConvergenceSeries(std::span<const double> positions,
                                         const BornDistribution& dist,
                                         std::int64_t bins,
                                         const CheckpointSchedule& schedule,
                                         double efficiency = 1.0);
ConvergenceSeries BuildConvergenceSeries(const EventLog& log,
                                         const BornDistribution& dist,
                                         std::int64_t bins,
                                         const CheckpointSchedule& schedule);

// Log-log OLS of D on N: D ~ C N^(-alpha).
struct RateFit {
  double alpha_hat = 0.0;
  double alpha_se = 0.0;  // NaN with only two points
  double c_hat = 0.0;
  double r_squared = 0.0;
  std::size_t points_used = 0;
  // Checkpoints dropped because D_k == 0.
  std::size_t zero_deviation_points = 0;
};

// Uses checkpoints with N_k >= min_n and D_k > 0. Throws
// Error(kInsufficientData) with fewer than two usable points.
RateFit FitRate(std::span<const SeriesPoint> series, std::uint64_t min_n);
inline RateFit FitRate(const ConvergenceSeries& series, std::uint64_t min_n) {
  return FitRate(series.checkpoints, min_n);
}

// Smallest constant with D_k <= C / N_k^alpha on the data, and the OLS
// slope of N_k^alpha D_k against log N_k. No verdict is drawn here.
struct BoundCheck {
  double alpha = 1.0;
  double c_min = 0.0;
  double c_trend = 0.0;
  std::size_t argmax = 0;  // checkpoint index attaining c_min
};

// Throws Error(kInsufficientData) for an empty series and
// Error(kInvalidParameter) for alpha <= 0.
BoundCheck CheckBound(std::span<const SeriesPoint> series, double alpha);

struct AnalysisOptions {
  std::int64_t bins = 64;
  CheckpointSchedule schedule;
  std::uint64_t burn_in = 100;  // minimum N_k entering the rate fit
};

struct Analysis {
  ConvergenceSeries series;
  RateFit fit;
  BoundCheck bound_alpha1;
  BoundCheck bound_alpha05;
};

Analysis AnalyzeSeries(ConvergenceSeries series, std::uint64_t burn_in);
Analysis AnalyzePositions(std::span<const double> positions,
                          const BornDistribution& dist,
                          const AnalysisOptions& options,
                          double efficiency = 1.0);

struct SweepOptions {
  std::vector<std::int64_t> bins{64};
  std::vector<double> efficiencies{1.0};
  std::uint64_t emitted = 100000;
  std::uint64_t replicas = 1;
  std::uint64_t base_seed = 0;
  CheckpointSchedule schedule;
  std::uint64_t burn_in = 100;
  unsigned workers = 1;
};

struct ReplicaResult {
  std::uint64_t replica = 0;
  std::uint64_t seed = 0;
  std::uint64_t recorded = 0;
  Analysis analysis;
};

struct SweepCell {
  std::int64_t bins = 0;
  double efficiency = 0.0;
  double median_alpha_hat = 0.0;
  double median_c_min_alpha1 = 0.0;
  double median_c_min_alpha05 = 0.0;
  double median_final_d = 0.0;
  std::vector<ReplicaResult> replicas;
};

// Full factorial over (M, e), ordered M-major. Replica r uses
// DeriveReplicaSeed(base_seed, r) in every cell, so cells sharing e see the
// same data and cells sharing a seed see the same positions.
std::vector<SweepCell> EfficiencySweep(const BornDistribution& dist,
                                       const SweepOptions& options);

double Median(std::vector<double> values);

}  // namespace bornrate

#endif  // BORNRATE_CONVERGENCE_H_
