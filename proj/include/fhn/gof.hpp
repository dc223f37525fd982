#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fhn/engine.hpp"

namespace fhn {

/// Family of curves on one common grid plus their pointwise envelope.
struct CurveBand {
  std::vector<double> xs;
  std::vector<double> posterior_mean;        ///< curve simulated under the posterior means
  std::vector<std::vector<double>> draws;    ///< one curve per resampled parameter
  std::vector<double> lower;                 ///< pointwise min over draws (empty without draws)
  std::vector<double> upper;                 ///< pointwise max over draws
  std::vector<double> observed;              ///< empty unless observed data was supplied
};

struct GofResult {
  ModelParams posterior_mean;
  std::vector<ModelParams> draws;  ///< parameters whose simulations succeeded
  std::size_t skipped = 0;         ///< resampled parameters whose path blew up
  CurveBand density;
  CurveBand spectrum;
};

/// Resamples n_draws parameters by weight, simulates one dataset per draw and
/// one under the posterior means, and collects their density and spectral
/// curves. Synthetic series have `series_length` values at cfg.obs_step.
GofResult gof_curves(const Population& pop, const EngineConfig& cfg, std::size_t n_draws, std::size_t series_length,
                     std::uint64_t seed, const ObservedSeries* observed = nullptr);

/// Writes gof_density.csv and gof_spectrum.csv (columns x, posterior_mean,
/// lower, upper, [observed], draw_1..draw_k) and gof_draws.csv.
void write_gof(const GofResult& gof, const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace fhn
