#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fhn {

/// Gaussian kernel density estimate on a uniform grid.
struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

/// Smoothed periodogram; frequencies in cycles per observation step.
struct SpectralEstimate {
  std::vector<double> frequencies;
  std::vector<double> values;
};

/// Invariant density and invariant spectral density estimates of one series.
struct StructureSummary {
  DensityEstimate density;
  SpectralEstimate spectrum;
};

/// Mean, variance, skewness, kurtosis and acf lags 1-5 of a series, followed by
/// the same nine statistics of its first differences.
struct CanonicalSummary {
  static constexpr std::size_t kSize = 18;
  std::array<double, kSize> values{};
};

/// Periodogram smoothing. `std::nullopt` selects the default single modified
/// Daniell span of 2 * floor(sqrt(n) / 2) + 1; an empty vector disables smoothing.
using SmoothingSpans = std::optional<std::vector<std::size_t>>;

inline constexpr std::size_t kDefaultDensityGrid = 1000;

/// Reference-rule bandwidth 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
double reference_bandwidth(std::span<const double> series);

/// Gaussian KDE evaluated on grid_size points over [min - 3 bw, max + 3 bw].
/// Throws DegenerateDataError for constant series.
DensityEstimate estimate_density(std::span<const double> series,
                                 std::size_t grid_size = kDefaultDensityGrid);

std::size_t default_smoothing_span(std::size_t n);

/// Periodogram of the detrended, split-cosine-tapered (10% each end) series at
/// the Fourier frequencies k/n, k = 1..floor(n/2), smoothed by iterated
/// modified Daniell filters. Raw power scale. Needs at least 8 values.
SpectralEstimate estimate_spectrum(std::span<const double> series,
                                   const SmoothingSpans& spans = std::nullopt);

/// Both estimates with the module defaults (or the given smoothing).
StructureSummary structure_summary(std::span<const double> series,
                                   const SmoothingSpans& spans = std::nullopt);

/// Sample autocorrelations at lags 1..max_lag (normalized by the lag-0 autocovariance).
std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag);

CanonicalSummary canonical_summary(std::span<const double> series);

}  // namespace fhn
