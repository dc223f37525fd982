#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include "fhn/engine.hpp"
#include "fhn/kernels.hpp"

namespace fhn {

inline constexpr std::array<const char*, 4> kParameterNames{"epsilon", "gamma", "beta", "sigma"};

struct ParameterSummary {
  double mean = 0.0;
  double sd = 0.0;       ///< weighted, weights summing to one
  double ci_low = 0.0;   ///< weighted 5% quantile
  double ci_high = 0.0;  ///< weighted 95% quantile
};

struct PosteriorReport {
  std::vector<Particle> samples;
  std::array<ParameterSummary, 4> parameters{};
  /// Weighted Pearson correlations; diagonal is 1, pairs with a zero SD are 0.
  std::array<std::array<double, 4>, 4> correlation{};
};

/// Smallest value whose cumulative normalized weight reaches q.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

PosteriorReport posterior_stats(const Population& pop);

/// Human-readable table of means, SDs, 90% CIs and the six pairwise correlations.
std::string format_report(const PosteriorReport& report);

/// Writes posterior_samples.csv, trace.csv, timing.csv, config.txt and
/// posterior_report.txt into out_dir (created if needed). Every file starts
/// with a "# seed=<seed>" line. All files except timing.csv are byte-identical
/// across reruns with the same seed. Throws IoError on write failures.
void export_results(const Population& pop, const RunTrace& trace, const EngineConfig& cfg,
                    const std::filesystem::path& out_dir);

/// Reads a posterior_samples.csv file back into a population.
Population load_samples(const std::filesystem::path& path);

/// Opens a file for writing or throws IoError carrying the OS reason.
std::ofstream open_for_writing(const std::filesystem::path& path);

}  // namespace fhn
