#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fhn/distances.hpp"
#include "fhn/kernels.hpp"
#include "fhn/model.hpp"
#include "fhn/priors.hpp"
#include "fhn/series.hpp"
#include "fhn/summaries.hpp"

namespace fhn {

enum class SummaryKind { structure, canonical };
enum class DistanceKind { iae, iae_wasserstein, weighted_euclidean };

std::string to_string(SummaryKind kind);
std::string to_string(DistanceKind kind);
std::string to_string(AlphaMode mode);
SummaryKind parse_summary_kind(const std::string& name);
DistanceKind parse_distance_kind(const std::string& name);
AlphaMode parse_alpha_mode(const std::string& name);

struct EngineConfig {
  std::size_t n_particles = 1000;
  double percentile = 50.0;
  std::uint64_t budget = 1'000'000;
  double sim_step = 0.02;
  /// Synthetic path length; 0 means "as long as the observed series".
  double sim_horizon = 0.0;
  double obs_step = 0.02;
  SummaryKind summary = SummaryKind::structure;
  DistanceKind distance = DistanceKind::iae;
  KernelKind kernel = KernelKind::standard;
  PriorSpec prior = PriorSpec::simulation_study();
  State x0{0.0, 0.0};
  std::uint64_t seed = 1;
  std::size_t pilot_size = 10'000;
  /// Mean-center observed and synthetic series before summarizing.
  bool center = false;
  AlphaMode alpha_mode = AlphaMode::area;
  SmoothingSpans spans;
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  unsigned workers = 0;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Step size, step count and observation stride of one synthetic dataset.
struct SimulationPlan {
  double step = 0.02;
  std::size_t steps = 0;
  std::size_t stride = 1;
  State x0;
};

/// Plan producing a synthetic series of the same length as `observed_length`
/// values at cfg.obs_step (or of cfg.sim_horizon when set).
SimulationPlan make_plan(const EngineConfig& cfg, std::size_t observed_length);

/// Observed-coordinate series of one synthetic dataset.
std::vector<double> simulate_series(const ModelParams& params, const SimulationPlan& plan, Rng& rng);

/// Observed-side summaries and the distance d(s(y), s(y_sim)) selected by the config.
class DistanceModel {
 public:
  struct Summary {
    std::optional<StructureSummary> structure;
    std::optional<CanonicalSummary> canonical;
    std::vector<double> sorted;  ///< only for iae_wasserstein
  };

  DistanceModel(const EngineConfig& cfg, const ObservedSeries& observed);

  /// Summaries of a synthetic series (centered first when configured).
  Summary summarize(std::vector<double> series) const;
  double distance(const Summary& simulated) const;

  void set_canonical_weights(const std::array<double, CanonicalSummary::kSize>& w);
  const std::optional<std::array<double, CanonicalSummary::kSize>>& canonical_weights() const {
    return canonical_weights_;
  }

  double alpha() const { return alpha_.value; }
  bool alpha_zero_area() const { return alpha_.zero_area; }
  const Summary& observed() const { return observed_; }

 private:
  SummaryKind summary_;
  DistanceKind distance_;
  bool center_;
  SmoothingSpans spans_;
  Summary observed_;
  SpectralWeight alpha_;
  std::optional<std::array<double, CanonicalSummary::kSize>> canonical_weights_;
};

/// Mean absolute deviation of each canonical summary component; zero
/// deviations are replaced by 1 so that every weight stays positive.
std::array<double, CanonicalSummary::kSize> mean_absolute_deviations(std::span<const CanonicalSummary> summaries);

/// p-th percentile with linear interpolation at rank 1 + p/100 (m - 1).
double percentile(std::span<const double> values, double p);

/// Next tolerance: p-th percentile of the accepted distances.
double next_threshold(std::span<const double> accepted_distances, double p);

struct PilotResult {
  double threshold = 0.0;
  std::vector<double> distances;
  std::optional<std::array<double, CanonicalSummary::kSize>> canonical_weights;
  std::uint64_t simulations = 0;
  std::uint64_t redraws = 0;  ///< prior draws with kappa <= 0 or failed paths
};

/// Simulates cfg.pilot_size datasets from the prior (not charged to the
/// budget) and returns the p-th percentile of their distances to the data.
PilotResult pilot_threshold(const EngineConfig& cfg, const ObservedSeries& observed);

struct IterationRecord {
  int iteration = 0;
  double threshold = 0.0;
  std::uint64_t simulations = 0;             ///< synthetic datasets in this iteration
  std::uint64_t cumulative_simulations = 0;  ///< Nsim after this iteration
  double acceptance_rate = 0.0;              ///< N / simulations
  double ess = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t immediate_rejections = 0;  ///< proposals outside the prior support or with kappa <= 0
  std::uint64_t blowups = 0;               ///< simulations rejected for non-finite states
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  double alpha = 0.0;
  bool alpha_zero_area = false;
  PilotResult pilot;
};

struct RunResult {
  Population population;
  RunTrace trace;
};

/// Called after every completed iteration; returning false ends the run early.
using IterationObserver = std::function<bool(const IterationRecord&, const Population&)>;

/// SMC-ABC with the simulation budget as stopping rule. The budget is checked
/// between iterations only, so the last iteration may overshoot it.
RunResult run_smc_abc(const EngineConfig& cfg, const ObservedSeries& observed,
                      const IterationObserver& observer = {});

/// Same, reusing an earlier pilot run on the same data and config.
RunResult run_smc_abc(const EngineConfig& cfg, const ObservedSeries& observed, const PilotResult& pilot,
                      const IterationObserver& observer = {});

}  // namespace fhn
