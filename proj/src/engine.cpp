#include "fhn/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "fhn/errors.hpp"

namespace fhn {

std::string to_string(SummaryKind kind) { return kind == SummaryKind::structure ? "structure" : "canonical"; }

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::iae:
      return "iae";
    case DistanceKind::iae_wasserstein:
      return "iae_wasserstein";
    case DistanceKind::weighted_euclidean:
      return "weighted_euclidean";
  }
  return "unknown";
}

std::string to_string(AlphaMode mode) { return mode == AlphaMode::area ? "area" : "magnitude"; }

SummaryKind parse_summary_kind(const std::string& name) {
  if (name == "structure") return SummaryKind::structure;
  if (name == "canonical") return SummaryKind::canonical;
  throw ConfigError("unknown summary kind '" + name + "'");
}

DistanceKind parse_distance_kind(const std::string& name) {
  if (name == "iae") return DistanceKind::iae;
  if (name == "iae_wasserstein") return DistanceKind::iae_wasserstein;
  if (name == "weighted_euclidean") return DistanceKind::weighted_euclidean;
  throw ConfigError("unknown distance kind '" + name + "'");
}

AlphaMode parse_alpha_mode(const std::string& name) {
  if (name == "area") return AlphaMode::area;
  if (name == "magnitude") return AlphaMode::magnitude;
  throw ConfigError("unknown alpha mode '" + name + "'");
}

namespace {

// Ratio a / b when it is a positive integer up to rounding, otherwise 0.
std::size_t integer_ratio(double a, double b) {
  const double r = a / b;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) return 0;
  return static_cast<std::size_t>(rounded);
}

}  // namespace

void EngineConfig::validate() const {
  if (n_particles == 0) throw ConfigError("n_particles must be positive");
  if (!(percentile > 0.0 && percentile <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
  if (!(sim_step > 0.0)) throw ConfigError("sim_step must be positive");
  if (!(obs_step > 0.0)) throw ConfigError("obs_step must be positive");
  if (integer_ratio(obs_step, sim_step) == 0) throw ConfigError("obs_step must be an integer multiple of sim_step");
  if (sim_horizon < 0.0) throw ConfigError("sim_horizon must be nonnegative");
  if (sim_horizon > 0.0 && integer_ratio(sim_horizon, obs_step) == 0) {
    throw ConfigError("sim_horizon must be an integer multiple of obs_step");
  }
  if (pilot_size == 0) throw ConfigError("pilot_size must be positive");
  if (n_particles > pilot_size) throw ConfigError("n_particles must not exceed pilot_size");
  if (budget < n_particles) throw ConfigError("budget must be at least n_particles");
  const bool canonical = summary == SummaryKind::canonical;
  const bool euclid = distance == DistanceKind::weighted_euclidean;
  if (canonical != euclid) {
    throw ConfigError("canonical summaries go with the weighted_euclidean distance and only with it");
  }
}

SimulationPlan make_plan(const EngineConfig& cfg, std::size_t observed_length) {
  SimulationPlan plan;
  plan.step = cfg.sim_step;
  plan.stride = integer_ratio(cfg.obs_step, cfg.sim_step);
  if (plan.stride == 0) throw ConfigError("obs_step must be an integer multiple of sim_step");
  std::size_t intervals = 0;
  if (cfg.sim_horizon > 0.0) {
    intervals = integer_ratio(cfg.sim_horizon, cfg.obs_step);
  } else {
    if (observed_length < 2) throw InsufficientDataError("observed series needs at least two values");
    intervals = observed_length - 1;
  }
  if (intervals == 0) throw ConfigError("simulation horizon shorter than one observation step");
  plan.steps = intervals * plan.stride;
  plan.x0 = cfg.x0;
  return plan;
}

std::vector<double> simulate_series(const ModelParams& params, const SimulationPlan& plan, Rng& rng) {
  return strang_voltage(params, plan.x0, plan.step, plan.steps, plan.stride, rng);
}

DistanceModel::DistanceModel(const EngineConfig& cfg, const ObservedSeries& observed)
    : summary_(cfg.summary), distance_(cfg.distance), center_(cfg.center), spans_(cfg.spans) {
  cfg.validate();
  if (integer_ratio(observed.obs_step, cfg.obs_step) != 1) {
    throw ConfigError("observed series step differs from the configured obs_step");
  }
  std::vector<double> values = observed.values;
  if (center_ && !observed.centered) center_values(values);
  // The observed side never gets re-centered below.
  const bool keep = center_;
  center_ = false;
  observed_ = summarize(std::move(values));
  center_ = keep;
  if (observed_.structure) alpha_ = spectral_weight(observed_.structure->spectrum, cfg.alpha_mode);
}

DistanceModel::Summary DistanceModel::summarize(std::vector<double> series) const {
  if (center_) center_values(series);
  Summary out;
  if (summary_ == SummaryKind::canonical) {
    out.canonical = canonical_summary(series);
    return out;
  }
  StructureSummary s;
  s.spectrum = estimate_spectrum(series, spans_);
  if (distance_ == DistanceKind::iae_wasserstein) {
    std::sort(series.begin(), series.end());
    out.sorted = std::move(series);
  } else {
    s.density = estimate_density(series);
  }
  out.structure = std::move(s);
  return out;
}

double DistanceModel::distance(const Summary& sim) const {
  switch (distance_) {
    case DistanceKind::iae:
      return structure_distance(*observed_.structure, *sim.structure, alpha_.value);
    case DistanceKind::iae_wasserstein:
      return iae(curve(observed_.structure->spectrum), curve(sim.structure->spectrum)) +
             alpha_.value * wasserstein1_sorted(observed_.sorted, sim.sorted);
    case DistanceKind::weighted_euclidean:
      if (!canonical_weights_) throw InvalidWeightsError("canonical distance used before its weights were set");
      return weighted_euclidean(*observed_.canonical, *sim.canonical, *canonical_weights_);
  }
  return 0.0;
}

void DistanceModel::set_canonical_weights(const std::array<double, CanonicalSummary::kSize>& w) {
  for (double x : w) {
    if (!(x > 0.0)) throw InvalidWeightsError("canonical weights must be positive");
  }
  canonical_weights_ = w;
}

std::array<double, CanonicalSummary::kSize> mean_absolute_deviations(std::span<const CanonicalSummary> summaries) {
  std::array<double, CanonicalSummary::kSize> out{};
  if (summaries.empty()) {
    out.fill(1.0);
    return out;
  }
  const double n = static_cast<double>(summaries.size());
  for (std::size_t k = 0; k < CanonicalSummary::kSize; ++k) {
    double mean = 0.0;
    for (const auto& s : summaries) mean += s.values[k];
    mean /= n;
    double dev = 0.0;
    for (const auto& s : summaries) dev += std::abs(s.values[k] - mean);
    dev /= n;
    out[k] = dev > 0.0 && std::isfinite(dev) ? dev : 1.0;
  }
  return out;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw InsufficientDataError("percentile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double next_threshold(std::span<const double> accepted_distances, double p) {
  return percentile(accepted_distances, p);
}

namespace {

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) over a pool of workers. The first exception stops
// the remaining work and is rethrown on the caller's thread.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (count <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(body);
  }
  if (error) std::rethrow_exception(error);
}

constexpr std::uint64_t kPilotStream = 0;
constexpr std::uint64_t kMaxAttemptsPerSlot = 5'000'000;

bool simulable(const ModelParams& p) { return p.all_positive() && kappa(p) > 0.0; }

struct SlotResult {
  ModelParams params;
  double distance = 0.0;
  std::uint64_t simulations = 0;
  std::uint64_t immediate_rejections = 0;
  std::uint64_t blowups = 0;
};

// Simulates and scores one proposal; nullopt when the path blew up.
std::optional<double> score(const ModelParams& params, const SimulationPlan& plan, const DistanceModel& model,
                            Rng& rng) {
  try {
    return model.distance(model.summarize(simulate_series(params, plan, rng)));
  } catch (const SimulationBlowupError&) {
    return std::nullopt;
  } catch (const DegenerateDataError&) {
    return std::nullopt;
  }
}

}  // namespace

PilotResult pilot_threshold(const EngineConfig& cfg, const ObservedSeries& observed) {
  DistanceModel model(cfg, observed);
  const SimulationPlan plan = make_plan(cfg, observed.values.size());
  const bool canonical = cfg.summary == SummaryKind::canonical;

  std::vector<DistanceModel::Summary> summaries(cfg.pilot_size);
  std::vector<std::uint64_t> redraws(cfg.pilot_size, 0);
  std::vector<std::uint64_t> failed(cfg.pilot_size, 0);
  parallel_for(cfg.pilot_size, worker_count(cfg.workers), [&](std::size_t i) {
    Rng rng = make_stream(cfg.seed, kPilotStream, i);
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt == kMaxAttemptsPerSlot) throw Error("pilot: no simulable prior draw found");
      const ModelParams p = prior_sample(cfg.prior, rng);
      if (!simulable(p)) {
        ++redraws[i];
        continue;
      }
      try {
        summaries[i] = model.summarize(simulate_series(p, plan, rng));
        return;
      } catch (const SimulationBlowupError&) {
        ++redraws[i];
        ++failed[i];
      } catch (const DegenerateDataError&) {
        ++redraws[i];
        ++failed[i];
      }
    }
  });

  PilotResult out;
  out.simulations = cfg.pilot_size + std::accumulate(failed.begin(), failed.end(), std::uint64_t{0});
  out.redraws = std::accumulate(redraws.begin(), redraws.end(), std::uint64_t{0});
  if (canonical) {
    std::vector<CanonicalSummary> all;
    all.reserve(summaries.size());
    for (const auto& s : summaries) all.push_back(*s.canonical);
    out.canonical_weights = mean_absolute_deviations(all);
    model.set_canonical_weights(*out.canonical_weights);
  }
  out.distances.resize(cfg.pilot_size);
  for (std::size_t i = 0; i < summaries.size(); ++i) out.distances[i] = model.distance(summaries[i]);
  out.threshold = percentile(out.distances, cfg.percentile);
  return out;
}

RunResult run_smc_abc(const EngineConfig& cfg, const ObservedSeries& observed, const IterationObserver& observer) {
  return run_smc_abc(cfg, observed, pilot_threshold(cfg, observed), observer);
}

RunResult run_smc_abc(const EngineConfig& cfg, const ObservedSeries& observed, const PilotResult& pilot,
                      const IterationObserver& observer) {
  DistanceModel model(cfg, observed);
  if (cfg.summary == SummaryKind::canonical) {
    if (!pilot.canonical_weights) throw ConfigError("pilot result carries no canonical weights");
    model.set_canonical_weights(*pilot.canonical_weights);
  }
  const SimulationPlan plan = make_plan(cfg, observed.values.size());
  const std::size_t n = cfg.n_particles;
  const unsigned workers = worker_count(cfg.workers);

  RunResult result;
  result.trace.alpha = model.alpha();
  result.trace.alpha_zero_area = model.alpha_zero_area();
  result.trace.pilot = pilot;

  std::uint64_t cumulative = 0;
  Population prev;
  double threshold = pilot.threshold;

  for (int r = 1;; ++r) {
    const auto started = std::chrono::steady_clock::now();
    if (r > 1) {
      std::vector<double> distances(prev.size());
      for (std::size_t j = 0; j < prev.size(); ++j) distances[j] = prev.particles[j].distance;
      threshold = next_threshold(distances, cfg.percentile);
    }

    // Proposal machinery for r > 1, fixed for the whole iteration.
    std::vector<GaussianKernel> kernels;
    std::vector<double> cumulative_weights;
    if (r > 1) {
      if (cfg.kernel == KernelKind::standard) {
        kernels.push_back(GaussianKernel::from_covariance(2.0 * weighted_covariance(prev)));
      } else {
        kernels.reserve(prev.size());
        for (const auto& p : prev.particles) {
          kernels.push_back(GaussianKernel::from_covariance(olcm_covariance(p.params, prev, threshold)));
        }
      }
      cumulative_weights.resize(prev.size());
      double running = 0.0;
      for (std::size_t l = 0; l < prev.size(); ++l) {
        running += prev.particles[l].weight;
        cumulative_weights[l] = running;
      }
    }

    std::vector<SlotResult> slots(n);
    parallel_for(n, workers, [&](std::size_t j) {
      Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(r), j);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      SlotResult& slot = slots[j];
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt == kMaxAttemptsPerSlot) throw Error("smc-abc: acceptance stalled in iteration " + std::to_string(r));
        ModelParams proposal;
        if (r == 1) {
          proposal = prior_sample(cfg.prior, rng);
        } else {
          const double u = unit(rng) * cumulative_weights.back();
          auto it = std::upper_bound(cumulative_weights.begin(), cumulative_weights.end(), u);
          const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_weights.begin()),
                                                 prev.size() - 1);
          const GaussianKernel& k = kernels.size() == 1 ? kernels[0] : kernels[idx];
          proposal = k.sample(prev.particles[idx].params, rng);
          if (!(prior_density(cfg.prior, proposal) > 0.0)) {
            ++slot.immediate_rejections;
            continue;
          }
        }
        if (!simulable(proposal)) {
          ++slot.immediate_rejections;
          continue;
        }
        ++slot.simulations;
        const auto d = score(proposal, plan, model, rng);
        if (!d) {
          ++slot.blowups;
          continue;
        }
        if (*d < threshold) {
          slot.params = proposal;
          slot.distance = *d;
          return;
        }
      }
    });

    Population pop;
    pop.iteration = r;
    pop.threshold = threshold;
    pop.particles.resize(n);
    IterationRecord rec;
    rec.iteration = r;
    rec.threshold = threshold;
    for (std::size_t j = 0; j < n; ++j) {
      pop.particles[j].params = slots[j].params;
      pop.particles[j].distance = slots[j].distance;
      rec.simulations += slots[j].simulations;
      rec.immediate_rejections += slots[j].immediate_rejections;
      rec.blowups += slots[j].blowups;
    }
    if (r == 1) {
      for (auto& p : pop.particles) p.weight = 1.0 / static_cast<double>(n);
    } else {
      std::vector<ModelParams> accepted(n);
      for (std::size_t j = 0; j < n; ++j) accepted[j] = pop.particles[j].params;
      const auto w = update_weights(accepted, prev, kernels, cfg.prior);
      for (std::size_t j = 0; j < n; ++j) pop.particles[j].weight = w[j];
    }
    cumulative += rec.simulations;
    rec.cumulative_simulations = cumulative;
    rec.acceptance_rate = static_cast<double>(n) / static_cast<double>(rec.simulations);
    // Uniform weights at iteration 1 give ESS = N; the sum of squares would only approximate it.
    rec.ess = r == 1 ? static_cast<double>(n) : ess(pop.weights());
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.trace.iterations.push_back(rec);
    prev = std::move(pop);

    const bool keep_going = !observer || observer(rec, prev);
    if (!keep_going || cumulative >= cfg.budget) break;
  }
  result.population = std::move(prev);
  return result;
}

}  // namespace fhn
