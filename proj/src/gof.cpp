#include "fhn/gof.hpp"

#include <algorithm>
#include <optional>
#include <random>

#include "fhn/config.hpp"
#include "fhn/errors.hpp"
#include "fhn/report.hpp"

namespace fhn {

namespace {

constexpr std::uint64_t kGofStream = 0x60f;

// Linear interpolation of (xs, ys) at sorted queries, zero outside [xs.front(), xs.back()].
std::vector<double> resample(const std::vector<double>& xs, const std::vector<double>& ys,
                             const std::vector<double>& at) {
  std::vector<double> out(at.size(), 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double x = at[i];
    if (x < xs.front() || x > xs.back()) continue;
    while (k + 2 < xs.size() && xs[k + 1] <= x) ++k;
    const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    out[i] = ys[k] + t * (ys[k + 1] - ys[k]);
  }
  return out;
}

void fill_envelope(CurveBand& band) {
  if (band.draws.empty()) return;
  band.lower = band.draws.front();
  band.upper = band.draws.front();
  for (const auto& d : band.draws) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      band.lower[i] = std::min(band.lower[i], d[i]);
      band.upper[i] = std::max(band.upper[i], d[i]);
    }
  }
}

void write_band(const CurveBand& band, const std::filesystem::path& path, std::uint64_t seed) {
  auto out = open_for_writing(path);
  out << "# seed=" << seed << "\n";
  out << "x,posterior_mean";
  if (!band.lower.empty()) out << ",lower,upper";
  if (!band.observed.empty()) out << ",observed";
  for (std::size_t d = 0; d < band.draws.size(); ++d) out << ",draw_" << d + 1;
  out << "\n";
  for (std::size_t i = 0; i < band.xs.size(); ++i) {
    out << format_double(band.xs[i]) << ',' << format_double(band.posterior_mean[i]);
    if (!band.lower.empty()) out << ',' << format_double(band.lower[i]) << ',' << format_double(band.upper[i]);
    if (!band.observed.empty()) out << ',' << format_double(band.observed[i]);
    for (const auto& d : band.draws) out << ',' << format_double(d[i]);
    out << "\n";
  }
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

GofResult gof_curves(const Population& pop, const EngineConfig& cfg, std::size_t n_draws, std::size_t series_length,
                     std::uint64_t seed, const ObservedSeries* observed) {
  if (pop.particles.empty()) throw Error("gof: empty population");
  const SimulationPlan plan = make_plan(cfg, series_length);
  const auto report = posterior_stats(pop);

  GofResult out;
  out.posterior_mean = {report.parameters[0].mean, report.parameters[1].mean, report.parameters[2].mean,
                        report.parameters[3].mean};

  const auto summarize = [&](std::vector<double> series) {
    if (cfg.center) center_values(series);
    return structure_summary(series, cfg.spans);
  };

  Rng mean_rng = make_stream(seed, kGofStream, 0);
  const StructureSummary mean_summary = summarize(simulate_series(out.posterior_mean, plan, mean_rng));

  std::vector<double> cumulative(pop.size());
  double running = 0.0;
  for (std::size_t j = 0; j < pop.size(); ++j) {
    running += pop.particles[j].weight;
    cumulative[j] = running;
  }
  Rng pick = make_stream(seed, kGofStream, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StructureSummary> summaries;
  for (std::size_t d = 0; d < n_draws; ++d) {
    const double u = unit(pick) * cumulative.back();
    const auto idx = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin()),
        pop.size() - 1);
    const ModelParams p = pop.particles[idx].params;
    Rng rng = make_stream(seed, kGofStream, d + 2);
    try {
      if (!(kappa(p) > 0.0)) throw UnsupportedRegimeError("gof: resampled parameter with kappa <= 0");
      summaries.push_back(summarize(simulate_series(p, plan, rng)));
      out.draws.push_back(p);
    } catch (const SimulationBlowupError&) {
      ++out.skipped;
    } catch (const UnsupportedRegimeError&) {
      ++out.skipped;
    }
  }

  std::optional<StructureSummary> obs_summary;
  if (observed) {
    std::vector<double> values = observed->values;
    if (cfg.center && !observed->centered) center_values(values);
    obs_summary = structure_summary(values, cfg.spans);
  }

  // Density curves live on different grids; put them on one grid spanning all of them.
  double lo = mean_summary.density.grid.front();
  double hi = mean_summary.density.grid.back();
  for (const auto& s : summaries) {
    lo = std::min(lo, s.density.grid.front());
    hi = std::max(hi, s.density.grid.back());
  }
  if (obs_summary) {
    lo = std::min(lo, obs_summary->density.grid.front());
    hi = std::max(hi, obs_summary->density.grid.back());
  }
  const std::size_t g = kDefaultDensityGrid;
  out.density.xs.resize(g);
  for (std::size_t i = 0; i < g; ++i) out.density.xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(g - 1);
  out.spectrum.xs = mean_summary.spectrum.frequencies;

  out.density.posterior_mean = resample(mean_summary.density.grid, mean_summary.density.values, out.density.xs);
  out.spectrum.posterior_mean = mean_summary.spectrum.values;
  for (const auto& s : summaries) {
    out.density.draws.push_back(resample(s.density.grid, s.density.values, out.density.xs));
    out.spectrum.draws.push_back(resample(s.spectrum.frequencies, s.spectrum.values, out.spectrum.xs));
  }
  if (obs_summary) {
    out.density.observed = resample(obs_summary->density.grid, obs_summary->density.values, out.density.xs);
    out.spectrum.observed = resample(obs_summary->spectrum.frequencies, obs_summary->spectrum.values, out.spectrum.xs);
  }
  fill_envelope(out.density);
  fill_envelope(out.spectrum);
  return out;
}

void write_gof(const GofResult& gof, const std::filesystem::path& out_dir, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  write_band(gof.density, out_dir / "gof_density.csv", seed);
  write_band(gof.spectrum, out_dir / "gof_spectrum.csv", seed);
  auto out = open_for_writing(out_dir / "gof_draws.csv");
  out << "# seed=" << seed << " skipped=" << gof.skipped << "\n";
  out << "label,epsilon,gamma,beta,sigma\n";
  const auto row = [&](const std::string& label, const ModelParams& p) {
    out << label << ',' << format_double(p.epsilon) << ',' << format_double(p.gamma) << ','
        << format_double(p.beta) << ',' << format_double(p.sigma) << "\n";
  };
  row("posterior_mean", gof.posterior_mean);
  for (std::size_t d = 0; d < gof.draws.size(); ++d) row("draw_" + std::to_string(d + 1), gof.draws[d]);
}

}  // namespace fhn
