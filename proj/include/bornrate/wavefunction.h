#ifndef BORNRATE_WAVEFUNCTION_H_
#define BORNRATE_WAVEFUNCTION_H_

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace bornrate {

enum class WavefunctionKind { kGaussian, kSingleSlit, kDoubleSlit, kTabulated };

std::string_view ToString(WavefunctionKind kind);
WavefunctionKind ParseWavefunctionKind(std::string_view name);

struct TablePoint {
  double x = 0.0;
  double intensity = 0.0;

  friend bool operator==(const TablePoint&, const TablePoint&) = default;
};

// Screen-axis intensity model |psi(x)|^2 in dimensionless units.
//
//   gaussian     exp(-x^2 / (2 sigma^2))
//   single_slit  sinc^2(beta x)
//   double_slit  cos^2(delta x) sinc^2(beta x)
//   tabulated    linear interpolation of (x, intensity), zero outside the table
//
// with sinc(u) = sin(u) / u. The model is truncated to [-L, L] and
// renormalized. A support half-width of 0 selects the per-kind default.
struct WavefunctionSpec {
  WavefunctionKind kind = WavefunctionKind::kGaussian;
  double sigma = 1.0;
  double beta = 1.0;
  double delta = 1.0;
  std::vector<TablePoint> table;
  double support_halfwidth = 0.0;
  // Largest admissible untruncated mass fraction outside [-L, L]. Unset
  // selects DefaultTruncationTolerance(kind).
  std::optional<double> truncation_tolerance;

  static WavefunctionSpec Gaussian(double sigma, double halfwidth = 0.0);
  static WavefunctionSpec SingleSlit(double beta, double halfwidth = 0.0);
  static WavefunctionSpec DoubleSlit(double beta, double delta,
                                     double halfwidth = 0.0);
  static WavefunctionSpec Tabulated(std::vector<TablePoint> table,
                                    double halfwidth = 0.0);

  friend bool operator==(const WavefunctionSpec&,
                         const WavefunctionSpec&) = default;
};

// The sinc^2 envelopes have 1/x^2 tails, so their truncated mass at any
// practical L is around 1/(pi beta L); they get a looser default than the
// exponentially decaying kinds.
double DefaultTruncationTolerance(WavefunctionKind kind);

// Unnormalized, untruncated intensity.
double RawIntensity(const WavefunctionSpec& spec, double x);

nlohmann::json ToJson(const WavefunctionSpec& spec);
// Accepts {"kind": ..., "sigma"|"beta"|"delta"|"table"|"L"|
// "truncation_tolerance"}. Table is a list of [x, intensity] pairs.
WavefunctionSpec SpecFromJson(const nlohmann::json& j);

// Two-column CSV (x, intensity). Blank lines, '#' comments and a
// non-numeric header row are skipped.
std::vector<TablePoint> ReadTableCsv(std::istream& in);

// Validated, normalized Born density and its cumulative distribution.
// Immutable once built; safe for concurrent reads.
class BornDistribution {
 public:
  // Checks the spec, normalizes over [-L, L] and builds the cdf grid.
  // Throws Error with kInvalidSpec, kDegenerateSpec or kTruncation.
  static BornDistribution Validate(WavefunctionSpec spec);

  const WavefunctionSpec& spec() const { return spec_; }
  double support_halfwidth() const { return halfwidth_; }
  // pdf(x) = norm() * RawIntensity(x) inside the support.
  double norm() const { return norm_; }
  // Untruncated mass fraction outside [-L, L].
  double tail_mass() const { return tail_mass_; }

  double Pdf(double x) const;
  // Monotone cubic Hermite interpolation of the quadrature grid; exactly 0
  // at and below -L, exactly 1 at and above +L.
  double Cdf(double x) const;
  // Smallest-bracket inverse of Cdf: |Cdf(Quantile(p)) - p| <= 1e-10.
  // Throws Error(kDomain) for p outside [0, 1].
  double Quantile(double p) const;

  std::span<const double> grid_x() const { return grid_x_; }
  std::span<const double> grid_cdf() const { return grid_cdf_; }

 private:
  BornDistribution() = default;

  double HermiteOnInterval(std::size_t i, double t) const;

  WavefunctionSpec spec_;
  double halfwidth_ = 0.0;
  double norm_ = 0.0;
  double tail_mass_ = 0.0;
  std::vector<double> grid_x_;
  std::vector<double> grid_cdf_;
  // Limited node slopes dF/dx.
  std::vector<double> slope_;
};

}  // namespace bornrate

#endif  // BORNRATE_WAVEFUNCTION_H_
