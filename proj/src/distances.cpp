#include "fhn/distances.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fhn/errors.hpp"

namespace fhn {

namespace {

void check_curve(CurveView g) {
  if (g.xs.size() != g.ys.size()) throw Error("iae: curve xs and ys differ in length");
  if (g.xs.size() < 2) throw InsufficientDataError("iae: a curve needs at least two points");
}

// Linear interpolation with zero extension; `cursor` only moves forward, so
// queries must be non-decreasing.
class Interpolator {
 public:
  explicit Interpolator(CurveView g) : g_(g) {}

  double operator()(double x) {
    const auto& xs = g_.xs;
    if (x < xs.front() || x > xs.back()) return 0.0;
    while (cursor_ + 2 < xs.size() && xs[cursor_ + 1] <= x) ++cursor_;
    const double x0 = xs[cursor_];
    const double x1 = xs[cursor_ + 1];
    const double t = (x - x0) / (x1 - x0);
    return g_.ys[cursor_] + t * (g_.ys[cursor_ + 1] - g_.ys[cursor_]);
  }

 private:
  CurveView g_;
  std::size_t cursor_ = 0;
};

}  // namespace

double iae(CurveView g1, CurveView g2) {
  check_curve(g1);
  check_curve(g2);
  std::vector<double> grid;
  grid.reserve(g1.xs.size() + g2.xs.size());
  std::merge(g1.xs.begin(), g1.xs.end(), g2.xs.begin(), g2.xs.end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  Interpolator f1(g1);
  Interpolator f2(g2);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    total += std::abs(f1(grid[i]) - f2(grid[i])) * (grid[i + 1] - grid[i]);
  }
  return total;
}

SpectralWeight spectral_weight(const SpectralEstimate& observed, AlphaMode mode) {
  const auto& f = observed.frequencies;
  const auto& s = observed.values;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) area += s[i] * (f[i + 1] - f[i]);
  if (!(area > 0.0)) return {0.0, true};
  if (mode == AlphaMode::magnitude) return {std::pow(10.0, std::round(std::log10(area))), false};
  return {area, false};
}

double structure_distance(const StructureSummary& observed, const StructureSummary& simulated, double alpha) {
  const double spectral = iae(curve(observed.spectrum), curve(simulated.spectrum));
  if (alpha == 0.0) return spectral;
  return spectral + alpha * iae(curve(observed.density), curve(simulated.density));
}

double weighted_euclidean(const CanonicalSummary& a, const CanonicalSummary& b, std::span<const double> w) {
  if (w.size() != CanonicalSummary::kSize) {
    throw InvalidWeightsError("weighted_euclidean: expected 18 weights");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < CanonicalSummary::kSize; ++k) {
    if (!(w[k] > 0.0)) throw InvalidWeightsError("weighted_euclidean: weights must be positive");
    const double d = (a.values[k] - b.values[k]) / w[k];
    total += d * d;
  }
  return std::sqrt(total);
}

namespace {

double quantile_sorted(std::span<const double> x, double p) {
  const double h = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

}  // namespace

double wasserstein1_sorted(std::span<const double> y, std::span<const double> ysim) {
  if (y.empty() || ysim.empty()) throw InsufficientDataError("wasserstein1: empty sample");
  const bool y_small = y.size() <= ysim.size();
  const auto small = y_small ? y : ysim;
  const auto large = y_small ? ysim : y;
  const std::size_t m = small.size();
  double total = 0.0;
  if (small.size() == large.size()) {
    for (std::size_t i = 0; i < m; ++i) total += std::abs(small[i] - large[i]);
  } else {
    // Resample the larger sample at the smaller one's plotting positions.
    for (std::size_t i = 0; i < m; ++i) {
      const double p = m == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(m - 1);
      total += std::abs(small[i] - quantile_sorted(large, p));
    }
  }
  return total / static_cast<double>(m);
}

double wasserstein1(std::span<const double> y, std::span<const double> ysim) {
  std::vector<double> a(y.begin(), y.end());
  std::vector<double> b(ysim.begin(), ysim.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return wasserstein1_sorted(a, b);
}

}  // namespace fhn
