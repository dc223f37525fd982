// fhnabc: simulate FitzHugh-Nagumo paths and fit them with SMC-ABC.
//
//   fhnabc simulate --theta 0.1 1.5 0.8 0.3 --horizon 200 --out path.csv
//   fhnabc pilot    --data path.csv --column v
//   fhnabc infer    --data path.csv --column v --out run/
//   fhnabc stats    --samples run/posterior_samples.csv
//   fhnabc gof      --samples run/posterior_samples.csv --data path.csv --column v --out run/

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fhn/config.hpp"
#include "fhn/engine.hpp"
#include "fhn/errors.hpp"
#include "fhn/gof.hpp"
#include "fhn/report.hpp"
#include "fhn/series.hpp"

namespace {

using namespace fhn;

// Options shared by the subcommands that need an engine configuration.
struct EngineOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::string alpha_mode;
  std::string spans;
  unsigned workers = 0;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
    for (const char* key : {"n_particles", "percentile", "budget", "sim_step", "sim_horizon", "obs_step", "summary",
                            "distance", "kernel", "prior_family", "prior_params", "x0_v", "x0_u", "seed",
                            "pilot_size", "center"}) {
      std::string flag = std::string("--") + key;
      for (char& ch : flag) {
        if (ch == '_') ch = '-';
      }
      app.add_option_function<std::string>(
          flag, [this, key](const std::string& v) { overrides[key] = v; }, std::string("overrides config key ") + key);
    }
    app.add_option("--alpha-mode", alpha_mode, "spectral weight: area (default) or magnitude");
    app.add_option("--spans", spans, "comma-separated Daniell spans, or 'none'");
    app.add_option("--workers", workers, "worker threads (0 = all cores)");
  }

  EngineConfig build() const {
    EngineConfig cfg = config_path.empty() ? EngineConfig{} : load_config(config_path);
    // prior_family resets prior_params, so it has to go first.
    if (auto it = overrides.find("prior_family"); it != overrides.end()) apply_setting(cfg, it->first, it->second);
    for (const auto& [key, value] : overrides) {
      if (key != "prior_family" && key != "prior_params") apply_setting(cfg, key, value);
    }
    if (auto it = overrides.find("prior_params"); it != overrides.end()) apply_setting(cfg, it->first, it->second);
    if (!alpha_mode.empty()) cfg.alpha_mode = parse_alpha_mode(alpha_mode);
    if (!spans.empty()) {
      std::vector<std::size_t> list;
      if (spans != "none") {
        for (const auto& field : split_fields(spans)) {
          double v = 0.0;
          if (!parse_double(field, v) || v < 1.0 || v != std::floor(v)) {
            throw ConfigError("--spans: '" + field + "' is not a positive integer");
          }
          list.push_back(static_cast<std::size_t>(v));
        }
      }
      cfg.spans = list;
    }
    cfg.workers = workers;
    return cfg;
  }
};

struct DataOptions {
  std::string path;
  std::string column = "0";
  double data_step = 0.0;
  std::size_t factor = 1;
  std::size_t count = 0;

  void attach(CLI::App& app, bool required) {
    auto* opt = app.add_option("-d,--data", path, "delimited text file with the observed series");
    if (required) opt->required();
    app.add_option("--column", column, "column name or zero-based index");
    app.add_option("--data-step", data_step, "sampling step of the file (default: obs_step)");
    app.add_option("--subsample", factor, "keep every k-th value")->check(CLI::PositiveNumber);
    app.add_option("--truncate", count, "keep the first n values after subsampling");
  }

  // Loads the series and aligns cfg.obs_step with its (subsampled) step.
  ObservedSeries load(EngineConfig& cfg) const {
    ColumnSelector sel = column;
    double idx = 0.0;
    if (parse_double(column, idx) && idx >= 0.0 && idx == std::floor(idx)) sel = static_cast<std::size_t>(idx);
    const double step = data_step > 0.0 ? data_step : cfg.obs_step / static_cast<double>(factor);
    ObservedSeries s = load_series(path, sel, step, false);
    s = subsample(s, factor);
    if (count > 0) s = truncate(s, count);
    if (cfg.center) {
      center_values(s.values);
      s.centered = true;
    }
    cfg.obs_step = s.obs_step;
    return s;
  }
};

void print_iteration(const IterationRecord& rec) {
  std::fprintf(stderr, "iter %3d  delta %.6g  sims %llu  total %llu  acc %.4f  ess %.1f  rej %llu  blowups %llu  %.1fs\n",
               rec.iteration, rec.threshold, static_cast<unsigned long long>(rec.simulations),
               static_cast<unsigned long long>(rec.cumulative_simulations), rec.acceptance_rate, rec.ess,
               static_cast<unsigned long long>(rec.immediate_rejections),
               static_cast<unsigned long long>(rec.blowups), rec.wall_seconds);
}

int run_simulate(const std::vector<double>& theta, double horizon, double step, double obs_step, double x0v,
                 double x0u, std::uint64_t seed, const std::string& out_path) {
  const ModelParams params{theta[0], theta[1], theta[2], theta[3]};
  const auto ratio = [](double a, double b) {
    const double r = a / b;
    const double k = std::round(r);
    return (k >= 1.0 && std::abs(r - k) <= 1e-9 * k) ? static_cast<std::size_t>(k) : std::size_t{0};
  };
  const std::size_t stride = ratio(obs_step, step);
  const std::size_t intervals = ratio(horizon, obs_step);
  if (stride == 0) throw ConfigError("--obs-step must be an integer multiple of --step");
  if (intervals == 0) throw ConfigError("--horizon must be a positive integer multiple of --obs-step");

  const StrangStepper stepper(params, step);
  Rng rng = make_stream(seed, 0, 0);
  std::normal_distribution<double> normal;
  auto out = open_for_writing(out_path);
  out << "# seed=" << seed << " epsilon=" << format_double(params.epsilon) << " gamma=" << format_double(params.gamma)
      << " beta=" << format_double(params.beta) << " sigma=" << format_double(params.sigma)
      << " step=" << format_double(step) << "\n";
  out << "time,v,u\n";
  State x{x0v, x0u};
  out << "0," << format_double(x.v) << ',' << format_double(x.u) << "\n";
  for (std::size_t i = 1; i <= intervals; ++i) {
    for (std::size_t k = 0; k < stride; ++k) x = stepper.advance(x, rng, normal);
    if (!std::isfinite(x.v) || !std::isfinite(x.u)) {
      throw SimulationBlowupError(i * stride, "simulate: non-finite state at observation " + std::to_string(i));
    }
    out << format_double(static_cast<double>(i) * obs_step) << ',' << format_double(x.v) << ','
        << format_double(x.u) << "\n";
  }
  out.flush();
  if (!out) throw IoError("write to '" + out_path + "' failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and SMC-ABC inference for the stochastic FitzHugh-Nagumo model"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "write one Strang-splitting path to a CSV file");
  std::vector<double> theta;
  double horizon = 200.0;
  double step = 1e-4;
  double sim_obs_step = 0.02;
  double x0v = 0.0;
  double x0u = 0.0;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  simulate->add_option("--theta", theta, "epsilon gamma beta sigma")->expected(4)->required();
  simulate->add_option("--horizon", horizon, "path length in time units");
  simulate->add_option("--step", step, "integration step");
  simulate->add_option("--obs-step", sim_obs_step, "spacing of the written rows");
  simulate->add_option("--x0-v", x0v);
  simulate->add_option("--x0-u", x0u);
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("-o,--out", sim_out, "output CSV (time,v,u)")->required();

  auto* pilot = app.add_subcommand("pilot", "initial tolerance and canonical weights from prior simulations");
  EngineOptions pilot_engine;
  DataOptions pilot_data;
  std::string pilot_out;
  pilot_engine.attach(*pilot);
  pilot_data.attach(*pilot, true);
  pilot->add_option("-o,--out", pilot_out, "optional CSV of the pilot distances");

  auto* infer = app.add_subcommand("infer", "full SMC-ABC run");
  EngineOptions infer_engine;
  DataOptions infer_data;
  std::string infer_out;
  bool quiet = false;
  infer_engine.attach(*infer);
  infer_data.attach(*infer, true);
  infer->add_option("-o,--out", infer_out, "output directory")->required();
  infer->add_flag("-q,--quiet", quiet, "no per-iteration progress");

  auto* stats = app.add_subcommand("stats", "posterior summary of an exported sample file");
  std::string stats_samples;
  stats->add_option("-s,--samples", stats_samples, "posterior_samples.csv")->required()->check(CLI::ExistingFile);

  auto* gof = app.add_subcommand("gof", "posterior predictive density and spectrum curves");
  EngineOptions gof_engine;
  DataOptions gof_data;
  std::string gof_samples;
  std::string gof_out;
  std::size_t gof_draws = 50;
  std::size_t gof_length = 0;
  gof_engine.attach(*gof);
  gof_data.attach(*gof, false);
  gof->add_option("-s,--samples", gof_samples, "posterior_samples.csv")->required()->check(CLI::ExistingFile);
  gof->add_option("-n,--draws", gof_draws, "number of resampled parameter values");
  gof->add_option("--length", gof_length, "synthetic series length when no data is given");
  gof->add_option("-o,--out", gof_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      return run_simulate(theta, horizon, step, sim_obs_step, x0v, x0u, sim_seed, sim_out);
    }
    if (*pilot) {
      EngineConfig cfg = pilot_engine.build();
      const ObservedSeries data = pilot_data.load(cfg);
      cfg.validate();
      const PilotResult res = pilot_threshold(cfg, data);
      std::cout << "# seed=" << cfg.seed << "\n";
      std::cout << "threshold = " << format_double(res.threshold) << "\n";
      std::cout << "simulations = " << res.simulations << "\nredraws = " << res.redraws << "\n";
      if (res.canonical_weights) {
        std::cout << "canonical_weights =";
        for (double w : *res.canonical_weights) std::cout << ' ' << format_double(w);
        std::cout << "\n";
      }
      if (!pilot_out.empty()) {
        auto out = open_for_writing(pilot_out);
        out << "# seed=" << cfg.seed << "\ndistance\n";
        for (double d : res.distances) out << format_double(d) << "\n";
      }
      return 0;
    }
    if (*infer) {
      EngineConfig cfg = infer_engine.build();
      const ObservedSeries data = infer_data.load(cfg);
      cfg.validate();
      const auto start = std::chrono::steady_clock::now();
      const RunResult res = run_smc_abc(cfg, data, [&](const IterationRecord& rec, const Population&) {
        if (!quiet) print_iteration(rec);
        return true;
      });
      export_results(res.population, res.trace, cfg, infer_out);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << format_report(posterior_stats(res.population));
      std::fprintf(stderr, "finished in %.1f s; results in %s\n", secs, infer_out.c_str());
      return 0;
    }
    if (*stats) {
      std::cout << format_report(posterior_stats(load_samples(stats_samples)));
      return 0;
    }
    if (*gof) {
      EngineConfig cfg = gof_engine.build();
      std::optional<ObservedSeries> data;
      if (!gof_data.path.empty()) data = gof_data.load(cfg);
      cfg.validate();
      const std::size_t length = data ? data->values.size() : gof_length;
      if (length < 8 && cfg.sim_horizon <= 0.0) {
        throw ConfigError("gof: give --data, --length (>= 8) or a positive sim_horizon");
      }
      const Population pop = load_samples(gof_samples);
      const GofResult res = gof_curves(pop, cfg, gof_draws, length, cfg.seed, data ? &*data : nullptr);
      write_gof(res, gof_out, cfg.seed);
      std::fprintf(stderr, "%zu draws simulated, %zu skipped after blow-ups\n", res.draws.size(), res.skipped);
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
