#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "fhn/config.hpp"
#include "fhn/errors.hpp"
#include "fhn/gof.hpp"
#include "fhn/report.hpp"
#include "fhn/series.hpp"
#include "scenarios.hpp"

using namespace fhn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("fhnabc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Population small_population(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Population pop;
  pop.iteration = 3;
  pop.threshold = 0.5;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pop.particles.push_back({{0.08 + 0.04 * u(g), 1.3 + 0.4 * u(g), 0.6 + 0.4 * u(g), 0.25 + 0.1 * u(g)},
                             0.2 + u(g), 0.5 * u(g)});
    total += pop.particles.back().weight;
  }
  for (auto& p : pop.particles) p.weight /= total;
  return pop;
}

}  // namespace

TEST_CASE("load series") {
  TempDir dir;
  const auto plain = dir.write("a.csv", "0.1\n0.2\n0.3\n");
  const auto centered = load_series(plain, std::size_t{0}, 0.02, true);
  REQUIRE(centered.values.size() == 3);
  CHECK(centered.values[0] == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(std::abs(centered.values[1]) < 1e-15);
  CHECK(centered.values[2] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(centered.centered);
  CHECK(centered.obs_step == 0.02);
  CHECK(centered.source == plain.string());
  const auto raw = load_series(plain, std::size_t{0}, 0.02, false);
  CHECK(raw.values == std::vector<double>{0.1, 0.2, 0.3});

  const auto tabbed = dir.write("b.tsv", "# comment\ntime\tv\n0\t1.5\n\n0.02\t-2e-3\n");
  CHECK(load_series(tabbed, std::string("v"), 0.02, false).values == std::vector<double>{1.5, -2e-3});
  CHECK(load_series(tabbed, std::size_t{1}, 0.02, false).values == std::vector<double>{1.5, -2e-3});

  CHECK_THROWS_AS(load_series(dir.write("h.csv", "time,v\n"), std::size_t{0}, 0.02, false), EmptyColumnError);
  CHECK_THROWS_AS(load_series(dir.path / "missing.csv", std::size_t{0}, 0.02, false), MissingFileError);
  CHECK_THROWS_AS(load_series(dir.write("n.csv", "v\n1\nabc\n"), std::size_t{0}, 0.02, false), NonNumericCellError);
  CHECK_THROWS_AS(load_series(tabbed, std::string("w"), 0.02, false), EmptyColumnError);
}

TEST_CASE("subsample and truncate") {
  ObservedSeries s;
  s.obs_step = 0.02;
  for (int i = 0; i < 10001; ++i) s.values.push_back(i);
  CHECK(subsample(s, 1).values == s.values);
  const auto four = subsample(s, 4);
  CHECK(four.values.size() == 2501);
  CHECK(four.obs_step == doctest::Approx(0.08).epsilon(1e-15));
  CHECK(four.values.front() == 0.0);
  CHECK(subsample(subsample(s, 3), 5).values == subsample(s, 15).values);
  CHECK(truncate(s, 5).values.size() == 5);
  CHECK(truncate(s, 20000).values.size() == 10001);
}

TEST_CASE("series round trip at full precision") {
  TempDir dir;
  std::mt19937_64 g(3);
  std::normal_distribution<double> z;
  std::vector<double> v(200);
  for (double& x : v) x = z(g) * std::pow(10.0, static_cast<int>(z(g) * 5));
  {
    std::ofstream out(dir.path / "r.csv");
    out << "v\n";
    for (double x : v) out << format_double(x) << "\n";
  }
  CHECK(load_series(dir.path / "r.csv", std::string("v"), 0.02, false).values == v);
}

TEST_CASE("config parsing") {
  const std::string text =
      "# run\nn_particles = 500\npercentile=25\nbudget = 200000\nobs_step = 0.08\nsummary = structure\n"
      "distance = iae\nkernel = olcm\nprior_params = 0.02, 0.4, 5, 0.1, 5, 0.05, 0.9\nx0_v = 0.1\nx0_u = -0.2\n"
      "seed = 42\npilot_size = 2000\ncenter = true\nsim_horizon = 50\n";
  const EngineConfig cfg = parse_config(text);
  CHECK(cfg.n_particles == 500);
  CHECK(cfg.percentile == 25.0);
  CHECK(cfg.budget == 200000);
  CHECK(cfg.kernel == KernelKind::olcm);
  CHECK(cfg.prior.hyper() == std::vector<double>{0.02, 0.4, 5, 0.1, 5, 0.05, 0.9});
  CHECK(cfg.x0 == State{0.1, -0.2});
  CHECK(cfg.seed == 42);
  CHECK(cfg.center);
  CHECK(cfg.sim_horizon == 50.0);

  const EngineConfig again = parse_config(format_config(cfg));
  CHECK(format_config(again) == format_config(cfg));

  const EngineConfig ln = parse_config("prior_params = 0,1,0,0.5,0,1,0,0.75\nprior_family = lognormal\n");
  CHECK(ln.prior.family() == PriorFamily::lognormal);
  CHECK(ln.prior.hyper() == PriorSpec::lognormal_default().hyper());

  CHECK_THROWS_AS(parse_config("alpha = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("n_particles = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kernel = fancy\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/fhnabc.cfg"), MissingFileError);
}

TEST_CASE("posterior statistics") {
  SUBCASE("equal weights reduce to unweighted statistics") {
    Population pop = small_population(9, 1);
    for (auto& p : pop.particles) p.weight = 1.0 / 9.0;
    const auto rep = posterior_stats(pop);
    std::vector<double> eps;
    for (const auto& p : pop.particles) eps.push_back(p.params.epsilon);
    double m = 0.0;
    for (double x : eps) m += x / 9.0;
    double v = 0.0;
    for (double x : eps) v += (x - m) * (x - m) / 9.0;
    CHECK(rep.parameters[0].mean == doctest::Approx(m).epsilon(1e-14));
    CHECK(rep.parameters[0].sd == doctest::Approx(std::sqrt(v)).epsilon(1e-12));
    std::sort(eps.begin(), eps.end());
    // Inverse empirical CDF: ceil(0.05 * 9) = 1st and ceil(0.95 * 9) = 9th order statistics.
    CHECK(rep.parameters[0].ci_low == eps[0]);
    CHECK(rep.parameters[0].ci_high == eps[8]);
  }
  SUBCASE("single particle") {
    Population pop = small_population(1, 2);
    pop.particles[0].weight = 1.0;
    const auto rep = posterior_stats(pop);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(rep.parameters[k].sd == 0.0);
      CHECK(rep.parameters[k].ci_low == rep.parameters[k].ci_high);
      CHECK(rep.parameters[k].ci_low == pop.particles[0].params.as_vector()[static_cast<int>(k)]);
    }
  }
  SUBCASE("correlations are bounded and symmetric") {
    const auto rep = posterior_stats(small_population(50, 3));
    for (std::size_t a = 0; a < 4; ++a) {
      CHECK(rep.correlation[a][a] == 1.0);
      for (std::size_t b = 0; b < 4; ++b) {
        CHECK(std::abs(rep.correlation[a][b]) <= 1.0);
        CHECK(rep.correlation[a][b] == doctest::Approx(rep.correlation[b][a]).epsilon(1e-14));
      }
    }
  }
  CHECK(weighted_quantile(std::vector<double>{3, 1, 2}, std::vector<double>{0.2, 0.5, 0.3}, 0.6) == 2.0);
}

TEST_CASE("export, reload and rerun determinism") {
  static const ObservedSeries data = scenario::observe(scenario::kTheta, 20.0, 0.08, 5);
  EngineConfig cfg = scenario::config_for(data, 1200, 9);
  cfg.n_particles = 80;
  cfg.pilot_size = 300;
  cfg.workers = 2;
  TempDir dir;
  const auto run = [&](const fs::path& out) {
    const auto res = run_smc_abc(cfg, data);
    export_results(res.population, res.trace, cfg, out);
    return res;
  };
  const auto res = run(dir.path / "a");
  run(dir.path / "b");

  for (const char* f : {"posterior_samples.csv", "trace.csv", "config.txt", "posterior_report.txt"}) {
    const std::string a = slurp(dir.path / "a" / f);
    CHECK(a.rfind("# seed=9\n", 0) == 0);
    CHECK(a == slurp(dir.path / "b" / f));
  }
  CHECK(slurp(dir.path / "a" / "timing.csv").rfind("# seed=9\n", 0) == 0);

  std::ifstream trace(dir.path / "a" / "trace.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(trace, line)) {
    if (!line.empty() && line.front() != '#' && line.rfind("iteration", 0) != 0) ++rows;
  }
  CHECK(rows == res.trace.iterations.size());

  const Population back = load_samples(dir.path / "a" / "posterior_samples.csv");
  REQUIRE(back.size() == res.population.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.particles[i].params == res.population.particles[i].params);
    CHECK(back.particles[i].weight == res.population.particles[i].weight);
    CHECK(back.particles[i].distance == res.population.particles[i].distance);
  }
  CHECK(format_report(posterior_stats(back)) == format_report(posterior_stats(res.population)));

  const EngineConfig echoed = load_config(dir.path / "a" / "config.txt");
  CHECK(format_config(echoed) == format_config(cfg));

  CHECK_THROWS_AS(export_results(res.population, res.trace, cfg, "/proc/fhnabc-not-writable"), IoError);
}

TEST_CASE("goodness-of-fit curves") {
  static const ObservedSeries data = scenario::observe(scenario::kTheta, 20.0, 0.08, 6);
  EngineConfig cfg = scenario::config_for(data, 1000, 4);
  const Population pop = small_population(40, 4);
  const std::size_t length = data.values.size();

  const auto none = gof_curves(pop, cfg, 0, length, 4);
  CHECK(none.draws.empty());
  CHECK(none.density.draws.empty());
  CHECK(none.density.lower.empty());
  CHECK(none.density.posterior_mean.size() == none.density.xs.size());
  CHECK(none.spectrum.posterior_mean.size() == none.spectrum.xs.size());

  const auto a = gof_curves(pop, cfg, 20, length, 4, &data);
  CHECK(a.draws.size() + a.skipped == 20);
  CHECK(a.density.draws.size() == a.draws.size());
  CHECK(a.density.observed.size() == a.density.xs.size());
  for (std::size_t i = 0; i < a.density.xs.size(); ++i) {
    CHECK(a.density.lower[i] <= a.density.upper[i]);
  }
  const auto mean = posterior_stats(pop);
  CHECK(a.posterior_mean.epsilon == mean.parameters[0].mean);

  TempDir dir;
  write_gof(a, dir.path / "x", 4);
  write_gof(gof_curves(pop, cfg, 20, length, 4, &data), dir.path / "y", 4);
  for (const char* f : {"gof_density.csv", "gof_spectrum.csv", "gof_draws.csv"}) {
    const std::string text = slurp(dir.path / "x" / f);
    CHECK(text.rfind("# seed=4", 0) == 0);
    CHECK(text == slurp(dir.path / "y" / f));
  }
}
