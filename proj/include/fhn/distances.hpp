#pragma once

#include <span>

#include "fhn/summaries.hpp"

namespace fhn {

/// Read-only view of a sampled curve; xs strictly increasing, same length as ys.
struct CurveView {
  std::span<const double> xs;
  std::span<const double> ys;
};

inline CurveView curve(const DensityEstimate& d) { return {d.grid, d.values}; }
inline CurveView curve(const SpectralEstimate& s) { return {s.frequencies, s.values}; }

/// Integrated absolute error by left-endpoint rectangles over the union of
/// both grids. Each curve is linearly interpolated inside its own range and
/// taken as zero outside it.
double iae(CurveView g1, CurveView g2);

enum class AlphaMode {
  area,       ///< area under the observed spectrum
  magnitude,  ///< 10^round(log10(area))
};

struct SpectralWeight {
  double value = 0.0;
  bool zero_area = false;  ///< set when the spectrum has no area; value is 0
};

SpectralWeight spectral_weight(const SpectralEstimate& observed, AlphaMode mode = AlphaMode::area);

/// IAE(spectra) + alpha * IAE(densities).
double structure_distance(const StructureSummary& observed, const StructureSummary& simulated, double alpha);

/// || (a - b) / w || with componentwise division; every weight must be positive.
double weighted_euclidean(const CanonicalSummary& a, const CanonicalSummary& b, std::span<const double> w);

/// Order-1 Wasserstein distance between two empirical distributions.
double wasserstein1(std::span<const double> y, std::span<const double> ysim);

/// Same, for inputs that are already sorted ascending.
double wasserstein1_sorted(std::span<const double> y, std::span<const double> ysim);

}  // namespace fhn
