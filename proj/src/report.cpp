#include "fhn/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "fhn/config.hpp"
#include "fhn/errors.hpp"

namespace fhn {

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  if (values.empty() || values.size() != weights.size()) throw Error("weighted_quantile: bad input sizes");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i : order) {
    acc += weights[i] / total;
    // Relative slack so that equal weights reproduce the unweighted inverse CDF.
    if (acc >= q * (1.0 - 1e-12)) return values[i];
  }
  return values[order.back()];
}

PosteriorReport posterior_stats(const Population& pop) {
  PosteriorReport rep;
  rep.samples = pop.particles;
  const std::size_t n = pop.size();
  if (n == 0) throw Error("posterior_stats: empty population");
  const auto w = pop.weights();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);

  std::array<std::vector<double>, 4> cols;
  for (auto& c : cols) c.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec4 x = pop.particles[j].params.as_vector();
    for (int k = 0; k < 4; ++k) cols[static_cast<std::size_t>(k)][j] = x[k];
  }
  std::array<double, 4> mean{};
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < n; ++j) mean[k] += w[j] / total * cols[k][j];
  }
  std::array<std::array<double, 4>, 4> cov{};
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t j = 0; j < n; ++j) cov[a][b] += w[j] / total * (cols[a][j] - mean[a]) * (cols[b][j] - mean[b]);
    }
  }
  for (std::size_t k = 0; k < 4; ++k) {
    auto& p = rep.parameters[k];
    p.mean = mean[k];
    p.sd = std::sqrt(std::max(cov[k][k], 0.0));
    p.ci_low = weighted_quantile(cols[k], w, 0.05);
    p.ci_high = weighted_quantile(cols[k], w, 0.95);
  }
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const double sa = rep.parameters[a].sd;
      const double sb = rep.parameters[b].sd;
      if (a == b) {
        rep.correlation[a][b] = 1.0;
      } else if (sa > 0.0 && sb > 0.0) {
        rep.correlation[a][b] = std::clamp(cov[a][b] / (sa * sb), -1.0, 1.0);
      } else {
        rep.correlation[a][b] = 0.0;
      }
    }
  }
  return rep;
}

std::string format_report(const PosteriorReport& rep) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "parameter,mean,sd,ci05,ci95\n";
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& p = rep.parameters[k];
    out << kParameterNames[k] << ',' << p.mean << ',' << p.sd << ',' << p.ci_low << ',' << p.ci_high << '\n';
  }
  out << "\npair,correlation\n";
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      out << kParameterNames[a] << ':' << kParameterNames[b] << ',' << rep.correlation[a][b] << '\n';
    }
  }
  return out.str();
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
  return out;
}

namespace {

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed: " + std::strerror(errno));
}

}  // namespace

void export_results(const Population& pop, const RunTrace& trace, const EngineConfig& cfg,
                    const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  const std::string seed_line = "# seed=" + std::to_string(cfg.seed) + "\n";

  {
    const auto path = out_dir / "posterior_samples.csv";
    auto out = open_for_writing(path);
    out << seed_line << "epsilon,gamma,beta,sigma,weight,distance\n";
    for (const auto& p : pop.particles) {
      out << format_double(p.params.epsilon) << ',' << format_double(p.params.gamma) << ','
          << format_double(p.params.beta) << ',' << format_double(p.params.sigma) << ','
          << format_double(p.weight) << ',' << format_double(p.distance) << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "trace.csv";
    auto out = open_for_writing(path);
    out << seed_line
        << "iteration,threshold,simulations,cumulative_simulations,acceptance_rate,ess,immediate_rejections,"
           "blowups\n";
    for (const auto& r : trace.iterations) {
      out << r.iteration << ',' << format_double(r.threshold) << ',' << r.simulations << ','
          << r.cumulative_simulations << ',' << format_double(r.acceptance_rate) << ',' << format_double(r.ess)
          << ',' << r.immediate_rejections << ',' << r.blowups << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "timing.csv";
    auto out = open_for_writing(path);
    out << seed_line << "iteration,wall_seconds\n";
    for (const auto& r : trace.iterations) out << r.iteration << ',' << format_double(r.wall_seconds) << '\n';
    finish(out, path);
  }
  {
    const auto path = out_dir / "config.txt";
    auto out = open_for_writing(path);
    out << seed_line << format_config(cfg);
    out << "# alpha_mode=" << to_string(cfg.alpha_mode) << " alpha=" << format_double(trace.alpha)
        << (trace.alpha_zero_area ? " (zero spectral area)" : "") << "\n";
    out << "# pilot_threshold=" << format_double(trace.pilot.threshold)
        << " pilot_simulations=" << trace.pilot.simulations << "\n";
    if (trace.pilot.canonical_weights) {
      out << "# canonical_weights=";
      for (std::size_t k = 0; k < trace.pilot.canonical_weights->size(); ++k) {
        out << (k ? "," : "") << format_double((*trace.pilot.canonical_weights)[k]);
      }
      out << "\n";
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "posterior_report.txt";
    auto out = open_for_writing(path);
    out << seed_line << format_report(posterior_stats(pop));
    finish(out, path);
  }
}

Population load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open samples file '" + path.string() + "'");
  Population pop;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.rfind("epsilon", 0) == 0) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 6) {
      throw NonNumericCellError("samples line " + std::to_string(line_no) + ": expected 6 fields");
    }
    std::array<double, 6> x{};
    for (std::size_t i = 0; i < 6; ++i) {
      if (!parse_double(fields[i], x[i])) {
        throw NonNumericCellError("samples line " + std::to_string(line_no) + ": non-numeric cell '" +
                                  fields[i] + "'");
      }
    }
    pop.particles.push_back({{x[0], x[1], x[2], x[3]}, x[4], x[5]});
  }
  if (pop.particles.empty()) throw EmptyColumnError("no samples in '" + path.string() + "'");
  return pop;
}

}  // namespace fhn
