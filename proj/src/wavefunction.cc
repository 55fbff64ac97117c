#include "bornrate/wavefunction.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "bornrate/error.h"
#include "bornrate/quadrature.h"

namespace bornrate {
namespace {

// Absolute quadrature tolerance on the raw mass, spread across the grid.
constexpr double kQuadratureTolerance = 1e-10;
// Grid spacing is 1 / (kNodesPerScale * frequency) for the analytic kinds.
constexpr double kNodesPerScale = 128.0;
constexpr std::size_t kMaxHalfIntervals = std::size_t{1} << 21;

double Sinc(double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }

std::string Fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

[[noreturn]] void InvalidSpec(const std::string& field,
                              const std::string& why) {
  throw Error(ErrorCode::kInvalidSpec,
              "invalid spec field '" + field + "': " + why);
}

void RequirePositive(double v, const std::string& field) {
  if (!(std::isfinite(v) && v > 0.0)) InvalidSpec(field, "must be > 0");
}

void CheckFields(const WavefunctionSpec& spec) {
  switch (spec.kind) {
    case WavefunctionKind::kGaussian:
      RequirePositive(spec.sigma, "sigma");
      break;
    case WavefunctionKind::kDoubleSlit:
      RequirePositive(spec.delta, "delta");
      [[fallthrough]];
    case WavefunctionKind::kSingleSlit:
      RequirePositive(spec.beta, "beta");
      break;
    case WavefunctionKind::kTabulated: {
      const auto& t = spec.table;
      if (t.size() < 3) InvalidSpec("table", "needs at least 3 points");
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i].x)) InvalidSpec("table", "non-finite x");
        if (!(std::isfinite(t[i].intensity) && t[i].intensity >= 0.0)) {
          InvalidSpec("table", "intensity must be finite and >= 0");
        }
        if (i > 0 && !(t[i].x > t[i - 1].x)) {
          InvalidSpec("table", "x must be strictly increasing");
        }
      }
      const bool all_zero = std::all_of(t.begin(), t.end(), [](auto& p) {
        return p.intensity == 0.0;
      });
      if (all_zero) {
        throw Error(ErrorCode::kDegenerateSpec,
                    "degenerate spec: tabulated intensity is identically zero");
      }
      break;
    }
  }
  if (!(std::isfinite(spec.support_halfwidth) &&
        spec.support_halfwidth >= 0.0)) {
    InvalidSpec("L", "must be >= 0 (0 selects the default)");
  }
  if (spec.truncation_tolerance &&
      !(*spec.truncation_tolerance > 0.0 && *spec.truncation_tolerance < 1.0)) {
    InvalidSpec("truncation_tolerance", "must lie in (0, 1)");
  }
}

double DefaultHalfwidth(const WavefunctionSpec& spec) {
  switch (spec.kind) {
    case WavefunctionKind::kGaussian:
      return 8.0 * spec.sigma;
    case WavefunctionKind::kSingleSlit:
    case WavefunctionKind::kDoubleSlit:
      return 10.0 / spec.beta;
    case WavefunctionKind::kTabulated:
      return std::max(std::abs(spec.table.front().x),
                      std::abs(spec.table.back().x));
  }
  return 0.0;
}

// Integral of the tabulated (piecewise linear) intensity over [a, b].
double TableIntegral(const std::vector<TablePoint>& t, double a, double b) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double lo = std::max(a, t[i].x);
    const double hi = std::min(b, t[i + 1].x);
    if (!(hi > lo)) continue;
    const double slope =
        (t[i + 1].intensity - t[i].intensity) / (t[i + 1].x - t[i].x);
    const double ylo = t[i].intensity + slope * (lo - t[i].x);
    const double yhi = t[i].intensity + slope * (hi - t[i].x);
    sum += 0.5 * (ylo + yhi) * (hi - lo);
  }
  return sum;
}

// Linear piece of the table containing `inside`, evaluated at x. Gives the
// one-sided limits at the table's kinks.
double SegmentValue(const std::vector<TablePoint>& t, double inside,
                    double x) {
  if (inside < t.front().x || inside > t.back().x) return 0.0;
  auto it = std::upper_bound(
      t.begin(), t.end(), inside,
      [](double v, const TablePoint& p) { return v < p.x; });
  if (it == t.end()) --it;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (x - lo.x) / (hi.x - lo.x);
  return std::max(0.0, lo.intensity + w * (hi.intensity - lo.intensity));
}

// Untruncated mass of each kind.
double UntruncatedMass(const WavefunctionSpec& spec) {
  constexpr double pi = std::numbers::pi;
  switch (spec.kind) {
    case WavefunctionKind::kGaussian:
      return spec.sigma * std::sqrt(2.0 * pi);
    case WavefunctionKind::kSingleSlit:
      return pi / spec.beta;
    case WavefunctionKind::kDoubleSlit:
      // cos^2 = (1 + cos 2 delta x) / 2 and the Fourier transform of sinc^2
      // is a triangle of half-width 2 beta.
      return pi / (2.0 * spec.beta) *
             (1.0 + std::max(0.0, 1.0 - spec.delta / spec.beta));
    case WavefunctionKind::kTabulated:
      return TableIntegral(spec.table, spec.table.front().x,
                           spec.table.back().x);
  }
  return 0.0;
}

double RequiredHalfwidth(const WavefunctionSpec& spec, double tol) {
  switch (spec.kind) {
    case WavefunctionKind::kGaussian: {
      double lo = 0.0, hi = 40.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::erfc(mid) > tol ? lo : hi) = mid;
      }
      return hi * spec.sigma * std::numbers::sqrt2;
    }
    case WavefunctionKind::kSingleSlit:
    case WavefunctionKind::kDoubleSlit:
      // Tail of sinc^2(beta x) beyond |x| > L is at most 2 / (beta^2 L).
      return 2.0 / (spec.beta * spec.beta * tol * UntruncatedMass(spec));
    case WavefunctionKind::kTabulated:
      return std::max(std::abs(spec.table.front().x),
                      std::abs(spec.table.back().x));
  }
  return 0.0;
}

std::vector<double> BuildNodes(const WavefunctionSpec& spec, double L) {
  std::vector<double> nodes;
  if (spec.kind == WavefunctionKind::kTabulated) {
    nodes.push_back(-L);
    for (const auto& p : spec.table) {
      if (p.x > -L && p.x < L) nodes.push_back(p.x);
    }
    nodes.push_back(L);
    return nodes;
  }
  double spacing = 0.0;
  switch (spec.kind) {
    case WavefunctionKind::kGaussian:
      spacing = spec.sigma / kNodesPerScale;
      break;
    case WavefunctionKind::kSingleSlit:
      spacing = 1.0 / (kNodesPerScale * spec.beta);
      break;
    case WavefunctionKind::kDoubleSlit:
      spacing = 1.0 / (kNodesPerScale * (spec.beta + spec.delta));
      break;
    default:
      break;
  }
  const auto half = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(L / spacing)), 16, kMaxHalfIntervals);
  // Mirror-exact nodes so symmetric intensities give symmetric cells.
  nodes.resize(2 * half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    const double t = L * static_cast<double>(k) / static_cast<double>(half);
    nodes[half + k] = t;
    nodes[half - k] = -t;
  }
  nodes[half] = 0.0;
  return nodes;
}

}  // namespace

std::string_view ToString(WavefunctionKind kind) {
  switch (kind) {
    case WavefunctionKind::kGaussian:
      return "gaussian";
    case WavefunctionKind::kSingleSlit:
      return "single_slit";
    case WavefunctionKind::kDoubleSlit:
      return "double_slit";
    case WavefunctionKind::kTabulated:
      return "tabulated";
  }
  return "unknown";
}

WavefunctionKind ParseWavefunctionKind(std::string_view name) {
  if (name == "gaussian") return WavefunctionKind::kGaussian;
  if (name == "single_slit") return WavefunctionKind::kSingleSlit;
  if (name == "double_slit") return WavefunctionKind::kDoubleSlit;
  if (name == "tabulated") return WavefunctionKind::kTabulated;
  InvalidSpec("kind", "unknown kind '" + std::string(name) + "'");
}

WavefunctionSpec WavefunctionSpec::Gaussian(double sigma, double halfwidth) {
  WavefunctionSpec s;
  s.kind = WavefunctionKind::kGaussian;
  s.sigma = sigma;
  s.support_halfwidth = halfwidth;
  return s;
}

WavefunctionSpec WavefunctionSpec::SingleSlit(double beta, double halfwidth) {
  WavefunctionSpec s;
  s.kind = WavefunctionKind::kSingleSlit;
  s.beta = beta;
  s.support_halfwidth = halfwidth;
  return s;
}

WavefunctionSpec WavefunctionSpec::DoubleSlit(double beta, double delta,
                                              double halfwidth) {
  WavefunctionSpec s;
  s.kind = WavefunctionKind::kDoubleSlit;
  s.beta = beta;
  s.delta = delta;
  s.support_halfwidth = halfwidth;
  return s;
}

WavefunctionSpec WavefunctionSpec::Tabulated(std::vector<TablePoint> table,
                                             double halfwidth) {
  WavefunctionSpec s;
  s.kind = WavefunctionKind::kTabulated;
  s.table = std::move(table);
  s.support_halfwidth = halfwidth;
  return s;
}

double DefaultTruncationTolerance(WavefunctionKind kind) {
  switch (kind) {
    case WavefunctionKind::kSingleSlit:
    case WavefunctionKind::kDoubleSlit:
      return 0.05;
    default:
      return 1e-12;
  }
}

double RawIntensity(const WavefunctionSpec& spec, double x) {
  switch (spec.kind) {
    case WavefunctionKind::kGaussian: {
      const double z = x / spec.sigma;
      return std::exp(-0.5 * z * z);
    }
    case WavefunctionKind::kSingleSlit: {
      const double s = Sinc(spec.beta * x);
      return s * s;
    }
    case WavefunctionKind::kDoubleSlit: {
      const double s = Sinc(spec.beta * x);
      const double c = std::cos(spec.delta * x);
      return c * c * s * s;
    }
    case WavefunctionKind::kTabulated: {
      const auto& t = spec.table;
      if (t.empty() || x < t.front().x || x > t.back().x) return 0.0;
      auto it = std::upper_bound(
          t.begin(), t.end(), x,
          [](double v, const TablePoint& p) { return v < p.x; });
      if (it == t.end()) return t.back().intensity;
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (x - lo.x) / (hi.x - lo.x);
      return lo.intensity + w * (hi.intensity - lo.intensity);
    }
  }
  return 0.0;
}

nlohmann::json ToJson(const WavefunctionSpec& spec) {
  nlohmann::json j;
  j["kind"] = std::string(ToString(spec.kind));
  switch (spec.kind) {
    case WavefunctionKind::kGaussian:
      j["sigma"] = spec.sigma;
      break;
    case WavefunctionKind::kDoubleSlit:
      j["delta"] = spec.delta;
      [[fallthrough]];
    case WavefunctionKind::kSingleSlit:
      j["beta"] = spec.beta;
      break;
    case WavefunctionKind::kTabulated: {
      auto rows = nlohmann::json::array();
      for (const auto& p : spec.table) rows.push_back({p.x, p.intensity});
      j["table"] = std::move(rows);
      break;
    }
  }
  j["L"] = spec.support_halfwidth;
  if (spec.truncation_tolerance) {
    j["truncation_tolerance"] = *spec.truncation_tolerance;
  }
  return j;
}

WavefunctionSpec SpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) InvalidSpec("spec", "must be a JSON object");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    InvalidSpec("kind", "missing");
  }
  WavefunctionSpec spec;
  spec.kind = ParseWavefunctionKind(j["kind"].get<std::string>());
  auto number = [&](const std::string& key) {
    const auto& v = j.at(key);
    if (!v.is_number()) InvalidSpec(key, "must be a number");
    return v.get<double>();
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (key == "sigma") {
      spec.sigma = number(key);
    } else if (key == "beta") {
      spec.beta = number(key);
    } else if (key == "delta") {
      spec.delta = number(key);
    } else if (key == "L") {
      spec.support_halfwidth = number(key);
    } else if (key == "truncation_tolerance") {
      spec.truncation_tolerance = number(key);
    } else if (key == "table") {
      if (!value.is_array()) InvalidSpec("table", "must be an array");
      for (const auto& row : value) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() ||
            !row[1].is_number()) {
          InvalidSpec("table", "rows must be [x, intensity] pairs");
        }
        spec.table.push_back({row[0].get<double>(), row[1].get<double>()});
      }
    } else {
      InvalidSpec(key, "unknown field");
    }
  }
  return spec;
}

std::vector<TablePoint> ReadTableCsv(std::istream& in) {
  std::vector<TablePoint> table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    auto parse = [&](std::string_view s, double& out) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      return ec == std::errc() && ptr == s.data() + s.size();
    };
    double x = 0.0, y = 0.0;
    const bool ok = comma != std::string::npos &&
                    parse(std::string_view(line).substr(0, comma), x) &&
                    parse(std::string_view(line).substr(comma + 1), y);
    if (!ok) {
      if (table.empty() && line_no == 1) continue;  // header row
      throw Error(ErrorCode::kParse, "table csv line " +
                                         std::to_string(line_no) +
                                         ": expected 'x,intensity'");
    }
    table.push_back({x, y});
  }
  return table;
}

BornDistribution BornDistribution::Validate(WavefunctionSpec spec) {
  CheckFields(spec);
  if (spec.support_halfwidth == 0.0) {
    spec.support_halfwidth = DefaultHalfwidth(spec);
  }
  const double L = spec.support_halfwidth;
  const double tol = spec.truncation_tolerance.value_or(
      DefaultTruncationTolerance(spec.kind));

  BornDistribution dist;
  dist.halfwidth_ = L;
  dist.grid_x_ = BuildNodes(spec, L);
  const auto& nodes = dist.grid_x_;
  const std::size_t cells = nodes.size() - 1;

  // Raw mass per cell.
  std::vector<double> mass(cells);
  if (spec.kind == WavefunctionKind::kTabulated) {
    for (std::size_t i = 0; i < cells; ++i) {
      mass[i] = TableIntegral(spec.table, nodes[i], nodes[i + 1]);
    }
  } else {
    auto f = [&spec](double x) { return RawIntensity(spec, x); };
    for (std::size_t i = 0; i < cells; ++i) {
      const double cell_tol =
          kQuadratureTolerance * (nodes[i + 1] - nodes[i]) / (2.0 * L);
      mass[i] = AdaptiveSimpson(f, nodes[i], nodes[i + 1], cell_tol);
    }
  }
  std::vector<double> cumulative(nodes.size(), 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    cumulative[i + 1] = cumulative[i] + mass[i];
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegenerateSpec,
                "degenerate spec: no intensity inside [-L, L]");
  }

  const double untruncated = UntruncatedMass(spec);
  if (spec.kind == WavefunctionKind::kGaussian) {
    dist.tail_mass_ = std::erfc(L / (spec.sigma * std::numbers::sqrt2));
  } else {
    dist.tail_mass_ = std::max(0.0, (untruncated - total) / untruncated);
  }
  if (dist.tail_mass_ > tol) {
    throw Error(ErrorCode::kTruncation,
                "truncation: L=" + Fmt(L) + " leaves tail mass " +
                    Fmt(dist.tail_mass_) + " > tolerance " + Fmt(tol) +
                    "; required L >= " + Fmt(RequiredHalfwidth(spec, tol)));
  }

  dist.norm_ = 1.0 / total;
  dist.grid_cdf_.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    dist.grid_cdf_[i] = cumulative[i] / total;
  }
  dist.grid_cdf_.front() = 0.0;
  dist.grid_cdf_.back() = 1.0;

  // Exact one-sided densities as Hermite slopes (two per cell so that the
  // tabulated kinks are reproduced), then the Fritsch-Carlson limiter.
  dist.slope_.resize(2 * cells);
  for (std::size_t i = 0; i < cells; ++i) {
    double left = dist.norm_ * RawIntensity(spec, nodes[i]);
    double right = dist.norm_ * RawIntensity(spec, nodes[i + 1]);
    if (spec.kind == WavefunctionKind::kTabulated) {
      const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
      left = dist.norm_ * SegmentValue(spec.table, mid, nodes[i]);
      right = dist.norm_ * SegmentValue(spec.table, mid, nodes[i + 1]);
    }
    const double h = nodes[i + 1] - nodes[i];
    const double secant = (dist.grid_cdf_[i + 1] - dist.grid_cdf_[i]) / h;
    if (secant <= 0.0) {
      left = right = 0.0;
    } else {
      const double a = left / secant;
      const double b = right / secant;
      const double r2 = a * a + b * b;
      if (r2 > 9.0) {
        const double scale = 3.0 / std::sqrt(r2);
        left *= scale;
        right *= scale;
      }
    }
    dist.slope_[2 * i] = left;
    dist.slope_[2 * i + 1] = right;
  }
  dist.spec_ = std::move(spec);
  return dist;
}

double BornDistribution::Pdf(double x) const {
  if (!(std::abs(x) <= halfwidth_)) return 0.0;
  return norm_ * RawIntensity(spec_, x);
}

double BornDistribution::HermiteOnInterval(std::size_t i, double t) const {
  const double f0 = grid_cdf_[i];
  const double f1 = grid_cdf_[i + 1];
  const double h = grid_x_[i + 1] - grid_x_[i];
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double v = f0 + (f1 - f0) * (3.0 * t2 - 2.0 * t3) +
                   h * slope_[2 * i] * (t3 - 2.0 * t2 + t) +
                   h * slope_[2 * i + 1] * (t3 - t2);
  return std::clamp(v, f0, f1);
}

double BornDistribution::Cdf(double x) const {
  if (std::isnan(x)) return x;
  if (x <= -halfwidth_) return 0.0;
  if (x >= halfwidth_) return 1.0;
  const auto it = std::upper_bound(grid_x_.begin(), grid_x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid_x_.begin()) - 1;
  const double t = (x - grid_x_[i]) / (grid_x_[i + 1] - grid_x_[i]);
  return HermiteOnInterval(i, t);
}

double BornDistribution::Quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kDomain,
                "domain: quantile probability must lie in [0, 1]");
  }
  if (p == 0.0) return -halfwidth_;
  if (p == 1.0) return halfwidth_;
  const auto it = std::lower_bound(grid_cdf_.begin(), grid_cdf_.end(), p);
  const auto j = static_cast<std::size_t>(it - grid_cdf_.begin());
  if (grid_cdf_[j] == p) return grid_x_[j];
  const std::size_t i = j - 1;
  const double f0 = grid_cdf_[i];
  const double f1 = grid_cdf_[i + 1];
  const double h = grid_x_[i + 1] - grid_x_[i];
  const double d0 = h * slope_[2 * i];
  const double d1 = h * slope_[2 * i + 1];

  // Safeguarded Newton on the cell's cubic in t = (x - x_i) / h.
  double lo = 0.0, hi = 1.0;
  double t = (p - f0) / (f1 - f0);
  for (int iter = 0; iter < 200; ++iter) {
    const double r = HermiteOnInterval(i, t) - p;
    if (std::abs(r) <= 2e-11) break;
    (r < 0.0 ? lo : hi) = t;
    if (hi - lo <= 1e-17) break;
    const double t2 = t * t;
    const double deriv = (f1 - f0) * (6.0 * t - 6.0 * t2) +
                         d0 * (3.0 * t2 - 4.0 * t + 1.0) +
                         d1 * (3.0 * t2 - 2.0 * t);
    double next = deriv > 0.0 ? t - r / deriv : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return std::clamp(grid_x_[i] + t * h, grid_x_[i], grid_x_[i + 1]);
}

}  // namespace bornrate
