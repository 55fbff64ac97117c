#include "bornrate/convergence.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "bornrate/error.h"
#include "bornrate/parallel.h"
#include "bornrate/philox.h"

namespace bornrate {
namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = std::numeric_limits<double>::quiet_NaN();
  double r_squared = 0.0;
};

LineFit OrdinaryLeastSquares(std::span<const double> x,
                             std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LineFit fit;
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (x.size() > 2) fit.slope_se = std::sqrt(ss_res / (n - 2.0) / sxx);
  return fit;
}

double PowN(std::uint64_t n, double alpha) {
  const auto v = static_cast<double>(n);
  if (alpha == 1.0) return v;
  if (alpha == 0.5) return std::sqrt(v);
  return std::pow(v, alpha);
}

}  // namespace

std::vector<std::uint64_t> Checkpoints(const CheckpointSchedule& schedule,
                                       std::uint64_t n) {
  if (schedule.base < 1) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'checkpoint-base': must be >= 1");
  }
  if (!(schedule.ratio > 1.0) || !std::isfinite(schedule.ratio)) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'checkpoint-ratio': must be > 1");
  }
  if (n < schedule.base) {
    throw Error(ErrorCode::kInsufficientData,
                "insufficient data: " + std::to_string(n) +
                    " events, first checkpoint needs " +
                    std::to_string(schedule.base));
  }
  std::vector<std::uint64_t> out;
  double v = static_cast<double>(schedule.base);
  for (;;) {
    const double r = std::round(v);
    if (r >= static_cast<double>(n)) break;
    const auto k = static_cast<std::uint64_t>(r);
    if (out.empty() || k > out.back()) out.push_back(k);
    v *= schedule.ratio;
  }
  out.push_back(n);
  return out;
}

double SupDeviation(const EmpiricalCdf& emp,
                    std::span<const double> reference_at_edges) {
  double d = 0.0;
  for (std::size_t j = 0; j < emp.values.size(); ++j) {
    d = std::max(d, std::abs(emp.values[j] - reference_at_edges[j]));
  }
  return d;
}

double SupDeviation(const EmpiricalCdf& emp, const BornDistribution& dist) {
  std::vector<double> ref(emp.edges.size());
  for (std::size_t j = 0; j < ref.size(); ++j) ref[j] = dist.Cdf(emp.edges[j]);
  return SupDeviation(emp, ref);
}

double TerminalDeviation(const EmpiricalCdf& emp,
                         const BornDistribution& dist) {
  return std::abs(emp.values.back() - dist.Cdf(dist.support_halfwidth()));
}

ConvergenceSeries BuildConvergenceSeries(std::span<const double> positions,
                                         const BornDistribution& dist,
                                         std::int64_t bins,
                                         const CheckpointSchedule& schedule,
                                         double efficiency) {
  ConvergenceSeries series;
  series.efficiency = efficiency;
  series.scheme = ChooseBinning(positions, bins);
  const auto checkpoints = Checkpoints(schedule, positions.size());

  const auto edges = series.scheme.UpperEdges();
  std::vector<double> reference(edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j) {
    reference[j] = dist.Cdf(edges[j]);
  }

  BinnedCounts counts(series.scheme);
  std::size_t next = 0;
  for (const std::uint64_t n_k : checkpoints) {
    while (next < n_k) counts.Add(positions[next++]);
    series.checkpoints.push_back(
        {n_k, SupDeviation(MakeEmpiricalCdf(counts), reference)});
  }
  return series;
}

ConvergenceSeries BuildConvergenceSeries(const EventLog& log,
                                         const BornDistribution& dist,
                                         std::int64_t bins,
                                         const CheckpointSchedule& schedule) {
  const auto xs = log.Positions();
  return BuildConvergenceSeries(xs, dist, bins, schedule,
                                log.detector.efficiency);
}

RateFit FitRate(std::span<const SeriesPoint> series, std::uint64_t min_n) {
  RateFit fit;
  std::vector<double> log_n, log_d;
  for (const auto& p : series) {
    if (p.n < min_n) continue;
    if (!(p.d > 0.0)) {
      ++fit.zero_deviation_points;
      continue;
    }
    log_n.push_back(std::log(static_cast<double>(p.n)));
    log_d.push_back(std::log(p.d));
  }
  if (log_n.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "insufficient data: rate fit needs two checkpoints with "
                "N >= burn-in and D > 0");
  }
  const LineFit line = OrdinaryLeastSquares(log_n, log_d);
  fit.alpha_hat = -line.slope;
  fit.alpha_se = line.slope_se;
  fit.c_hat = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  fit.points_used = log_n.size();
  return fit;
}

BoundCheck CheckBound(std::span<const SeriesPoint> series, double alpha) {
  if (series.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "insufficient data: empty convergence series");
  }
  if (!(alpha > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'alpha': must be > 0");
  }
  BoundCheck check;
  check.alpha = alpha;
  std::vector<double> log_n, scaled;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = PowN(series[k].n, alpha) * series[k].d;
    if (k == 0 || y >= check.c_min) {
      check.c_min = y;
      check.argmax = k;
    }
    log_n.push_back(std::log(static_cast<double>(series[k].n)));
    scaled.push_back(y);
  }
  check.c_trend = OrdinaryLeastSquares(log_n, scaled).slope;
  return check;
}

Analysis AnalyzeSeries(ConvergenceSeries series, std::uint64_t burn_in) {
  Analysis a;
  a.fit = FitRate(series.checkpoints, burn_in);
  a.bound_alpha1 = CheckBound(series.checkpoints, 1.0);
  a.bound_alpha05 = CheckBound(series.checkpoints, 0.5);
  a.series = std::move(series);
  return a;
}

Analysis AnalyzePositions(std::span<const double> positions,
                          const BornDistribution& dist,
                          const AnalysisOptions& options, double efficiency) {
  return AnalyzeSeries(BuildConvergenceSeries(positions, dist, options.bins,
                                              options.schedule, efficiency),
                       options.burn_in);
}

double Median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<SweepCell> EfficiencySweep(const BornDistribution& dist,
                                       const SweepOptions& options) {
  if (options.bins.empty() || options.efficiencies.empty()) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter: sweep needs non-empty M and e lists");
  }
  if (options.replicas < 1) {
    throw Error(ErrorCode::kInvalidParameter,
                "invalid parameter 'replicas': must be >= 1");
  }
  const std::size_t n_bins = options.bins.size();
  const std::size_t n_eff = options.efficiencies.size();
  const std::size_t n_rep = options.replicas;

  // One task per (e, replica): sample once, analyze at every M.
  std::vector<ReplicaResult> results(n_eff * n_rep * n_bins);
  ParallelFor(n_eff * n_rep, options.workers, [&](std::size_t task) {
    const std::size_t ie = task / n_rep;
    const std::size_t r = task % n_rep;
    const std::uint64_t seed = DeriveReplicaSeed(options.base_seed, r);
    const double e = options.efficiencies[ie];
    const EventLog log = SampleEvents(dist, DetectorModel{e}, options.emitted,
                                      seed);
    const auto xs = log.Positions();
    for (std::size_t im = 0; im < n_bins; ++im) {
      AnalysisOptions ao;
      ao.bins = options.bins[im];
      ao.schedule = options.schedule;
      ao.burn_in = options.burn_in;
      auto& slot = results[(im * n_eff + ie) * n_rep + r];
      slot.replica = r;
      slot.seed = seed;
      slot.recorded = xs.size();
      slot.analysis = AnalyzePositions(xs, dist, ao, e);
    }
  });

  std::vector<SweepCell> cells;
  for (std::size_t im = 0; im < n_bins; ++im) {
    for (std::size_t ie = 0; ie < n_eff; ++ie) {
      SweepCell cell;
      cell.bins = options.bins[im];
      cell.efficiency = options.efficiencies[ie];
      std::vector<double> alpha, c1, c05, dfinal;
      for (std::size_t r = 0; r < n_rep; ++r) {
        auto& res = results[(im * n_eff + ie) * n_rep + r];
        alpha.push_back(res.analysis.fit.alpha_hat);
        c1.push_back(res.analysis.bound_alpha1.c_min);
        c05.push_back(res.analysis.bound_alpha05.c_min);
        dfinal.push_back(res.analysis.series.checkpoints.back().d);
        cell.replicas.push_back(std::move(res));
      }
      cell.median_alpha_hat = Median(std::move(alpha));
      cell.median_c_min_alpha1 = Median(std::move(c1));
      cell.median_c_min_alpha05 = Median(std::move(c05));
      cell.median_final_d = Median(std::move(dfinal));
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace bornrate
