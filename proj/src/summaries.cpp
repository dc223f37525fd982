#include "fhn/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "fhn/errors.hpp"

namespace fhn {

namespace {

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

void require_finite(std::span<const double> x, const char* who) {
  for (double v : x) {
    if (!std::isfinite(v)) throw DegenerateDataError(std::string(who) + ": non-finite value in series");
  }
}

// Type-7 quantile of a scratch copy (reordered in place).
double quantile7(std::vector<double>& scratch, double p) {
  const double h = p * static_cast<double>(scratch.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(lo), scratch.end());
  const double xlo = scratch[lo];
  if (lo + 1 >= scratch.size()) return xlo;
  const double xhi = *std::min_element(scratch.begin() + static_cast<std::ptrdiff_t>(lo) + 1, scratch.end());
  return xlo + (h - static_cast<double>(lo)) * (xhi - xlo);
}

}  // namespace

double reference_bandwidth(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw InsufficientDataError("bandwidth: need at least two values");
  const double m = mean_of(series);
  double ss = 0.0;
  for (double v : series) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> scratch(series.begin(), series.end());
  const double q1 = quantile7(scratch, 0.25);
  const double q3 = quantile7(scratch, 0.75);
  double lo = std::min(sd, (q3 - q1) / 1.34);
  if (!(lo > 0.0)) lo = sd > 0.0 ? sd : (std::abs(series.front()) > 0.0 ? std::abs(series.front()) : 1.0);
  return 0.9 * lo * std::pow(static_cast<double>(n), -0.2);
}

DensityEstimate estimate_density(std::span<const double> series, std::size_t grid_size) {
  if (series.size() < 2) throw InsufficientDataError("estimate_density: need at least two values");
  if (grid_size < 2) throw Error("estimate_density: grid_size must be at least 2");
  require_finite(series, "estimate_density");
  if (is_constant(series)) throw DegenerateDataError("estimate_density: constant series");

  const double bw = reference_bandwidth(series);
  const auto [min_it, max_it] = std::minmax_element(series.begin(), series.end());
  const double from = *min_it - 3.0 * bw;
  const double to = *max_it + 3.0 * bw;

  // Linear binning onto a power-of-two work grid that extends one further
  // bandwidth on each side, followed by a direct Gaussian convolution.
  std::size_t bins = std::max<std::size_t>(grid_size, 512);
  if (bins > 512) bins = std::size_t{1} << static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(bins))));
  const double lo = from - 4.0 * bw;
  const double up = to + 4.0 * bw;
  const double delta = (up - lo) / static_cast<double>(bins - 1);
  const double mass = 1.0 / static_cast<double>(series.size());

  std::vector<double> counts(bins, 0.0);
  for (double x : series) {
    const double pos = (x - lo) / delta;
    const auto ix = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(ix);
    counts[ix] += mass * (1.0 - frac);
    if (ix + 1 < bins) counts[ix + 1] += mass * frac;
  }

  const auto reach = std::min<std::size_t>(bins - 1, static_cast<std::size_t>(std::ceil(8.0 * bw / delta)));
  std::vector<double> kernel(reach + 1);
  const double norm = 1.0 / (bw * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t d = 0; d <= reach; ++d) {
    const double z = static_cast<double>(d) * delta / bw;
    kernel[d] = norm * std::exp(-0.5 * z * z);
  }

  std::vector<double> work(bins, 0.0);
  for (std::size_t j = 0; j < bins; ++j) {
    const double c = counts[j];
    if (c == 0.0) continue;
    const std::size_t first = j >= reach ? j - reach : 0;
    const std::size_t last = std::min(bins - 1, j + reach);
    for (std::size_t i = first; i <= last; ++i) work[i] += c * kernel[i > j ? i - j : j - i];
  }

  DensityEstimate out;
  out.bandwidth = bw;
  out.grid.resize(grid_size);
  out.values.resize(grid_size);
  const double step = (to - from) / static_cast<double>(grid_size - 1);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = from + step * static_cast<double>(i);
    out.grid[i] = x;
    const double pos = (x - lo) / delta;
    const auto ix = std::min(static_cast<std::size_t>(pos), bins - 2);
    const double frac = pos - static_cast<double>(ix);
    out.values[i] = std::max(0.0, work[ix] + frac * (work[ix + 1] - work[ix]));
  }
  return out;
}

std::size_t default_smoothing_span(std::size_t n) {
  return 2 * static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)) / 2.0)) + 1;
}

namespace {

// Circular modified Daniell filter of half-width m: weights 1/(2m) inside,
// 1/(4m) at the two ends.
void modified_daniell(std::vector<double>& x, std::size_t m) {
  if (m == 0) return;
  const std::size_t n = x.size();
  // Circularly padded copy: ext[k] = x[(k - m) mod n].
  std::vector<double> ext(n + 2 * m);
  for (std::size_t k = 0; k < ext.size(); ++k) ext[k] = x[(k + n * (m / n + 1) - m) % n];
  std::vector<double> prefix(ext.size() + 1, 0.0);
  for (std::size_t k = 0; k < ext.size(); ++k) prefix[k + 1] = prefix[k] + ext[k];
  const double w = 1.0 / (2.0 * static_cast<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    const double inner = prefix[i + 2 * m] - prefix[i + 1];
    x[i] = w * (inner + 0.5 * (ext[i] + ext[i + 2 * m]));
  }
}

}  // namespace

SpectralEstimate estimate_spectrum(std::span<const double> series, const SmoothingSpans& spans) {
  const std::size_t n = series.size();
  if (n < 8) throw InsufficientDataError("estimate_spectrum: need at least 8 values");
  require_finite(series, "estimate_spectrum");

  // Least-squares linear detrend (removes the mean as well).
  const double nd = static_cast<double>(n);
  const double tmid = 0.5 * (nd + 1.0);
  const double m = mean_of(series);
  double stt = 0.0;
  double sxt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1) - tmid;
    stt += t * t;
    sxt += (series[i] - m) * t;
  }
  const double slope = sxt / stt;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = series[i] - m - slope * (static_cast<double>(i + 1) - tmid);
  }

  // Split cosine bell over 10% of the data at each end.
  constexpr double kTaper = 0.1;
  const auto tapered = static_cast<std::size_t>(std::floor(nd * kTaper));
  for (std::size_t i = 0; i < tapered; ++i) {
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(2 * i + 1) /
                                           static_cast<double>(2 * tapered)));
    x[i] *= w;
    x[n - 1 - i] *= w;
  }
  const double taper_correction = 1.0 - (5.0 / 8.0) * kTaper * 2.0;

  std::vector<double> half;
  detail::power_spectrum(x, half);
  std::vector<double> full(n);
  for (std::size_t k = 0; k < n; ++k) {
    full[k] = (k <= n / 2 ? half[k] : half[n - k]) / nd;
  }
  full[0] = 0.5 * (full[1] + full[n - 1]);

  const std::vector<std::size_t> chosen = spans ? *spans : std::vector<std::size_t>{default_smoothing_span(n)};
  for (std::size_t span : chosen) modified_daniell(full, span / 2);

  SpectralEstimate out;
  const std::size_t count = n / 2;
  out.frequencies.resize(count);
  out.values.resize(count);
  for (std::size_t k = 1; k <= count; ++k) {
    out.frequencies[k - 1] = static_cast<double>(k) / nd;
    out.values[k - 1] = std::max(0.0, full[k] / taper_correction);
  }
  return out;
}

StructureSummary structure_summary(std::span<const double> series, const SmoothingSpans& spans) {
  return {estimate_density(series), estimate_spectrum(series, spans)};
}

namespace {

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
};

Moments central_moments(std::span<const double> x) {
  Moments mo;
  mo.mean = mean_of(x);
  for (double v : x) {
    const double d = v - mo.mean;
    const double d2 = d * d;
    mo.m2 += d2;
    mo.m3 += d2 * d;
    mo.m4 += d2 * d2;
  }
  const double n = static_cast<double>(x.size());
  mo.m2 /= n;
  mo.m3 /= n;
  mo.m4 /= n;
  return mo;
}

std::vector<double> acf_unchecked(std::span<const double> x, double mean, double c0, std::size_t max_lag) {
  const std::size_t n = x.size();
  std::vector<double> out(max_lag);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) c += (x[t] - mean) * (x[t + lag] - mean);
    out[lag - 1] = c / static_cast<double>(n) / c0;
  }
  return out;
}

// Nine statistics of one block; a zero-variance block reports 0 for the
// scale-free entries.
void fill_block(std::span<const double> x, double* dst) {
  const Moments mo = central_moments(x);
  dst[0] = mo.mean;
  dst[1] = mo.m2;
  if (mo.m2 > 0.0) {
    dst[2] = mo.m3 / std::pow(mo.m2, 1.5);
    dst[3] = mo.m4 / (mo.m2 * mo.m2);
    const auto acf = acf_unchecked(x, mo.mean, mo.m2, 5);
    std::copy(acf.begin(), acf.end(), dst + 4);
  } else {
    std::fill(dst + 2, dst + 9, 0.0);
  }
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  if (max_lag == 0 || max_lag >= series.size()) {
    throw InsufficientDataError("autocorrelation: max_lag must be in [1, n)");
  }
  const Moments mo = central_moments(series);
  if (!(mo.m2 > 0.0)) throw DegenerateDataError("autocorrelation: zero variance");
  return acf_unchecked(series, mo.mean, mo.m2, max_lag);
}

CanonicalSummary canonical_summary(std::span<const double> series) {
  if (series.size() < 7) throw InsufficientDataError("canonical_summary: need at least 7 values");
  require_finite(series, "canonical_summary");
  if (is_constant(series)) throw DegenerateDataError("canonical_summary: constant series");
  CanonicalSummary out;
  fill_block(series, out.values.data());
  std::vector<double> diff(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) diff[i] = series[i + 1] - series[i];
  fill_block(diff, out.values.data() + 9);
  return out;
}

}  // namespace fhn
