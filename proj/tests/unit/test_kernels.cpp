#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "fhn/errors.hpp"
#include "fhn/kernels.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace fhn;

namespace {

Population make_population(const std::vector<ModelParams>& ps, const std::vector<double>& w,
                           const std::vector<double>& d = {}) {
  Population pop;
  pop.iteration = 1;
  pop.threshold = 1.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    pop.particles.push_back({ps[i], w[i], d.empty() ? 0.0 : d[i]});
  }
  return pop;
}

Population random_population(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ModelParams> ps;
  std::vector<double> w, d;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ps.push_back({0.05 + 0.1 * u(g), 1.0 + u(g), 0.5 + u(g), 0.2 + 0.2 * u(g)});
    w.push_back(0.1 + u(g));
    d.push_back(u(g));
    total += w.back();
  }
  for (double& x : w) x /= total;
  return make_population(ps, w, d);
}

}  // namespace

TEST_CASE("weighted covariance") {
  const ModelParams a{1, 0, 0, 0}, b{-1, 0, 0, 0};
  const Mat4 c = weighted_covariance(make_population({a, b}, {0.5, 0.5}));
  Mat4 expected = Mat4::Zero();
  expected(0, 0) = 1.0;
  CHECK((c - expected).cwiseAbs().maxCoeff() == 0.0);

  const ModelParams p{0.1, 1.5, 0.8, 0.3};
  CHECK(weighted_covariance(make_population({p, p, p}, {0.2, 0.3, 0.5})).cwiseAbs().maxCoeff() < 1e-30);
  CHECK(weighted_covariance(make_population({p, a, b}, {1.0, 0.0, 0.0})).cwiseAbs().maxCoeff() == 0.0);

  const Population pop = random_population(5, 1);
  const Mat4 w = weighted_covariance(pop);
  Vec4 mean = Vec4::Zero();
  for (const auto& q : pop.particles) mean += q.weight * q.params.as_vector();
  CHECK((w - oracle::local_scatter(ModelParams::from_vector(mean), pop, 2.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("olcm covariance") {
  for (std::uint64_t seed = 2; seed < 7; ++seed) {
    const Population pop = random_population(4, seed);
    const ModelParams center = pop.particles[1].params;
    const double delta = 0.6;
    bool any = false;
    for (const auto& q : pop.particles) any = any || q.distance < delta;
    if (!any) continue;
    const Mat4 got = olcm_covariance(center, pop, delta);
    const Mat4 ref = oracle::local_scatter(center, pop, delta);
    if (Eigen::LLT<Mat4>(ref).info() == Eigen::Success) {
      CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-12);
    } else {
      // Fewer than four survivors: the scatter is singular and gets the documented jitter.
      Mat4 jittered = ref;
      jittered.diagonal().array() += 1e-10 * (1.0 + ref.trace());
      CHECK((got - jittered).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  // Full truncation around the weighted mean reproduces the weighted covariance.
  const Population pop = random_population(5, 8);
  Vec4 mean = Vec4::Zero();
  for (const auto& q : pop.particles) mean += q.weight * q.params.as_vector();
  const Mat4 all = olcm_covariance(ModelParams::from_vector(mean), pop, 2.0);
  CHECK((all - weighted_covariance(pop)).cwiseAbs().maxCoeff() < 1e-12);

  // A single survivor sitting on the center leaves only the jitter.
  Population one = make_population({scenario::kTheta, {0.2, 2.0, 1.0, 0.5}}, {0.5, 0.5}, {0.1, 0.9});
  const Mat4 tiny = olcm_covariance(scenario::kTheta, one, 0.5);
  CHECK(tiny.diagonal().minCoeff() > 0.0);
  CHECK(tiny.diagonal().maxCoeff() < 1e-9);
  Rng rng = make_stream(1, 3);
  CHECK_NOTHROW(GaussianKernel::from_covariance(tiny).sample(scenario::kTheta, rng));

  CHECK_THROWS_AS(olcm_covariance(scenario::kTheta, one, 0.05), EmptyTruncationError);
}

TEST_CASE("perturb") {
  Rng rng = make_stream(4, 3);
  CHECK(perturb(scenario::kTheta, Mat4::Zero(), rng) == scenario::kTheta);

  Rng a = make_stream(5, 3);
  Rng b = make_stream(5, 3);
  CHECK(perturb(scenario::kTheta, Mat4::Identity(), a) == perturb(scenario::kTheta, Mat4::Identity(), b));

  Mat4 c;
  c << 1.0, 0.3, 0.0, 0.1, 0.3, 0.8, 0.2, 0.0, 0.0, 0.2, 1.2, -0.4, 0.1, 0.0, -0.4, 0.9;
  const int n = 100'000;
  Vec4 sum = Vec4::Zero();
  Mat4 sq = Mat4::Zero();
  Rng r = make_stream(6, 3);
  const ModelParams zero{0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const Vec4 x = perturb(zero, c, r).as_vector();
    sum += x;
    sq += x * x.transpose();
  }
  const Vec4 mean = sum / n;
  const Mat4 cov = sq / n - mean * mean.transpose();
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov - c).cwiseAbs().maxCoeff() < 0.05);

  Vec4 s2 = Vec4::Zero();
  Rng ri = make_stream(7, 3);
  for (int i = 0; i < n; ++i) {
    const Vec4 x = perturb(zero, Mat4::Identity(), ri).as_vector();
    s2 += x.cwiseProduct(x);
  }
  CHECK((s2 / n - Vec4::Ones()).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("kernel density") {
  const ModelParams m{0.1, 1.5, 0.8, 0.3};
  const double peak = kernel_density(m, m, Mat4::Identity());
  CHECK(peak == doctest::Approx(1.0 / (4.0 * std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
  CHECK(kernel_density(m, m, 2.0 * Mat4::Identity()) == doctest::Approx(peak / 4.0).epsilon(1e-14));

  Mat4 c;
  c << 1.0, 0.3, 0.0, 0.1, 0.3, 0.8, 0.2, 0.0, 0.0, 0.2, 1.2, -0.4, 0.1, 0.0, -0.4, 0.9;
  const ModelParams x{0.4, 1.1, 0.2, 0.9};
  CHECK(kernel_density(x, m, c) == doctest::Approx(kernel_density(m, x, c)).epsilon(1e-14));
  CHECK(kernel_density(x, m, c) == doctest::Approx(oracle::normal_density(x, m, c)).epsilon(1e-12));
  const auto k = GaussianKernel::from_covariance(c);
  CHECK(k.density(x, m) == doctest::Approx(oracle::normal_density(x, m, c)).epsilon(1e-12));
  CHECK(k.log_density(x, m) == doctest::Approx(std::log(oracle::normal_density(x, m, c))).epsilon(1e-12));

  Mat4 singular = Mat4::Zero();
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(kernel_density(x, m, singular), NumericalError);
}

TEST_CASE("gaussian kernel jitter policy") {
  const auto k = GaussianKernel::from_covariance(Mat4::Zero());
  CHECK(k.covariance().diagonal().minCoeff() > 0.0);
  CHECK(k.covariance().diagonal().maxCoeff() <= 1e-10 * 1024);
  Mat4 bad = -Mat4::Identity();
  CHECK_THROWS_AS(GaussianKernel::from_covariance(bad), NumericalError);
}

TEST_CASE("weight update against a brute-force evaluation") {
  const auto prior = PriorSpec::simulation_study();
  const Population prev = random_population(3, 9);
  const std::vector<ModelParams> fresh{{0.12, 1.4, 0.9, 0.3}, {0.09, 1.7, 1.2, 0.25}, {0.14, 1.1, 0.7, 0.35}};

  SUBCASE("shared kernel") {
    const Mat4 cov = Mat4::Identity();
    const auto k = GaussianKernel::from_covariance(cov);
    const auto w = update_weights(fresh, prev, std::span<const GaussianKernel>(&k, 1), prior);
    const auto ref = oracle::importance_weights(fresh, prev, {cov}, prior);
    double total = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      CHECK(std::abs(w[j] - ref[j]) < 1e-12);
      total += w[j];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  SUBCASE("one kernel per previous particle") {
    std::vector<GaussianKernel> ks;
    std::vector<Mat4> covs;
    for (std::size_t l = 0; l < 3; ++l) {
      Mat4 c = Mat4::Identity() * (0.01 * static_cast<double>(l + 1));
      c(0, 1) = c(1, 0) = 0.001;
      covs.push_back(c);
      ks.push_back(GaussianKernel::from_covariance(c));
    }
    const auto w = update_weights(fresh, prev, ks, prior);
    const auto ref = oracle::importance_weights(fresh, prev, covs, prior);
    for (std::size_t j = 0; j < w.size(); ++j) CHECK(std::abs(w[j] - ref[j]) < 1e-12);
  }
  SUBCASE("single previous particle") {
    const Population single = make_population({scenario::kTheta}, {1.0});
    const auto k = GaussianKernel::from_covariance(0.01 * Mat4::Identity());
    const std::vector<ModelParams> one{fresh[0]};
    const auto w = update_weights(one, single, std::span<const GaussianKernel>(&k, 1), prior);
    CHECK(w[0] == 1.0);
  }
  SUBCASE("rescaling the previous weights does not matter") {
    Population scaled = prev;
    for (auto& p : scaled.particles) p.weight *= 3.7;
    const auto k = GaussianKernel::from_covariance(0.05 * Mat4::Identity());
    const auto a = update_weights(fresh, prev, std::span<const GaussianKernel>(&k, 1), prior);
    const auto b = update_weights(fresh, scaled, std::span<const GaussianKernel>(&k, 1), prior);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - b[j]) < 1e-12);
  }
  SUBCASE("far-away particles do not underflow to a degenerate population") {
    const auto k = GaussianKernel::from_covariance(1e-8 * Mat4::Identity());
    const auto w = update_weights(fresh, prev, std::span<const GaussianKernel>(&k, 1), prior);
    double total = 0.0;
    for (double x : w) total += x;
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  SUBCASE("all outside the prior") {
    const std::vector<ModelParams> outside{{0.9, 1.0, 1.0, 0.5}, {0.1, 1.0, 1.0, 2.0}};
    const auto k = GaussianKernel::from_covariance(Mat4::Identity());
    CHECK_THROWS_AS(update_weights(outside, prev, std::span<const GaussianKernel>(&k, 1), prior),
                    DegeneratePopulationError);
  }
}

TEST_CASE("effective sample size") {
  CHECK(ess(std::vector<double>(4, 0.25)) == 4.0);
  CHECK(ess(std::vector<double>{1.0, 0.0, 0.0}) == 1.0);
  CHECK(ess(std::vector<double>{0.5, 0.5, 0.0, 0.0}) == 2.0);
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  CHECK(ess(w) == doctest::Approx(1.0 / 0.3).epsilon(1e-14));
}
