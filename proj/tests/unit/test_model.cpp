#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fhn/errors.hpp"
#include "fhn/model.hpp"
#include "fhn/priors.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace fhn;

namespace {

double max_abs_diff(const Mat2& a, const Mat2& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("kappa") {
  CHECK(kappa({0.1, 1.5, 0.8, 0.3}) == doctest::Approx(59.0).epsilon(1e-14));
  CHECK(kappa({1.0, 0.25, 1.0, 1.0}) == 0.0);
  CHECK(kappa({1.0, 0.1, 1.0, 1.0}) == doctest::Approx(-0.6).epsilon(1e-14));
}

TEST_CASE("linear matrices at t = 0 are identity and zero") {
  const auto m = linear_matrices(scenario::kTheta, 0.0);
  CHECK(max_abs_diff(m.expm, Mat2::Identity()) == 0.0);
  CHECK(m.cov.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear matrices match matrix-exponential and quadrature oracles") {
  const auto m = linear_matrices(scenario::kTheta, 0.02);
  CHECK(max_abs_diff(m.expm, oracle::expm(scenario::kTheta, 0.02)) < 1e-12);
  CHECK(max_abs_diff(m.cov, oracle::covariance(scenario::kTheta, 0.02)) < 1e-10);
}

TEST_CASE("closed forms hold over random weakly damped parameters") {
  Rng rng = make_stream(99, 1);
  const auto prior = PriorSpec::simulation_study();
  for (int draw = 0; draw < 100; ++draw) {
    const ModelParams p = prior_sample(prior, rng);
    REQUIRE(kappa(p) > 0.0);
    for (double t : {0.005, 0.01, 0.02, 0.05, 0.1}) {
      const auto m = linear_matrices(p, t);
      CHECK(max_abs_diff(m.expm, oracle::expm(p, t)) < 1e-10);
      CHECK(max_abs_diff(m.cov, oracle::covariance(p, t)) < 1e-10);
      CHECK(m.cov(0, 1) == m.cov(1, 0));
      Eigen::SelfAdjointEigenSolver<Mat2> eig(m.cov);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("unsupported regime is rejected") {
  CHECK_THROWS_AS(linear_matrices({1.0, 0.25, 1.0, 1.0}, 0.1), UnsupportedRegimeError);
  CHECK_THROWS_AS(linear_matrices({1.0, 0.1, 1.0, 1.0}, 0.1), UnsupportedRegimeError);
  CHECK_THROWS_AS(StrangStepper({1.0, 0.1, 1.0, 1.0}, 0.02), UnsupportedRegimeError);
}

TEST_CASE("covariance composes over half steps") {
  for (double dt : {0.02, 0.005}) {
    const auto full = linear_matrices(scenario::kTheta, dt);
    const auto half = linear_matrices(scenario::kTheta, dt / 2.0);
    const Mat2 composed = half.expm * half.cov * half.expm.transpose() + half.cov;
    CHECK(max_abs_diff(full.cov, composed) < 1e-10);
    CHECK(max_abs_diff(full.expm, half.expm * half.expm) < 1e-12);
  }
}

TEST_CASE("ode flow") {
  const ModelParams p = scenario::kTheta;
  SUBCASE("identity at t = 0") {
    const State x{0.7, -0.3};
    CHECK(ode_flow(x, 0.0, p) == x);
  }
  SUBCASE("fixed points of v - v^3") {
    for (double v : {-1.0, 0.0, 1.0}) {
      const State y = ode_flow({v, 0.25}, 0.3, p);
      CHECK(y.v == v);
      CHECK(y.u == doctest::Approx(0.25 + p.beta * 0.3).epsilon(1e-15));
    }
  }
  SUBCASE("matches adaptive integration") {
    const State x{0.5, 0.0};
    const State a = ode_flow(x, 0.05, p);
    const State b = oracle::nonlinear_flow(x, 0.05, p);
    CHECK(std::abs(a.v - b.v) < 1e-8);
    CHECK(std::abs(a.u - b.u) < 1e-8);
  }
  SUBCASE("semigroup") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> vs(-2.0, 2.0);
    std::uniform_real_distribution<double> ts(0.0, 0.5);
    for (int i = 0; i < 200; ++i) {
      const State x{vs(g), vs(g)};
      const double s = ts(g);
      const double t = ts(g);
      const State twice = ode_flow(ode_flow(x, s, p), t, p);
      const State once = ode_flow(x, s + t, p);
      CHECK(std::abs(twice.v - once.v) < 1e-12);
      CHECK(std::abs(twice.u - once.u) < 1e-12);
    }
  }
}

TEST_CASE("drift") {
  const Vec2 a = drift({0.0, 0.0}, scenario::kTheta);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(0.8));
  const Vec2 b = drift({1.0, 0.0}, {1.0, 1.0, 0.0, 1.0});
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 1.0);

  std::mt19937_64 g(11);
  std::normal_distribution<double> z;
  const ModelParams p = scenario::kTheta;
  for (int i = 0; i < 50; ++i) {
    const State x{z(g), z(g)};
    const Vec2 linear = drift_matrix(p) * Vec2(x.v, x.u);
    const Vec2 split = linear + Vec2((x.v - x.v * x.v * x.v) / p.epsilon, p.beta);
    const Vec2 full = drift(x, p);
    CHECK(std::abs(split[0] - full[0]) < 1e-12 * (1.0 + std::abs(full[0])));
    CHECK(std::abs(split[1] - full[1]) < 1e-12 * (1.0 + std::abs(full[1])));
  }
}

TEST_CASE("strang path basics") {
  const State x0{0.2, -0.1};
  Rng a = make_stream(3, 0);
  Rng b = make_stream(3, 0);
  const Trajectory t1 = strang_path(scenario::kTheta, x0, 0.02, 500, a);
  const Trajectory t2 = strang_path(scenario::kTheta, x0, 0.02, 500, b);
  CHECK(t1.v.size() == 501);
  CHECK(t1.u.size() == 501);
  CHECK(t1.steps() == 500);
  CHECK(t1.v[0] == x0.v);
  CHECK(t1.u[0] == x0.u);
  CHECK(t1.v == t2.v);
  CHECK(t1.u == t2.u);

  Rng c = make_stream(3, 0);
  const auto voltage = strang_voltage(scenario::kTheta, x0, 0.02, 500, 5, c);
  REQUIRE(voltage.size() == 101);
  for (std::size_t i = 0; i < voltage.size(); ++i) CHECK(voltage[i] == t1.v[5 * i]);
}

TEST_CASE("non-finite state raises a blow-up error with the step index") {
  Rng rng = make_stream(1, 0);
  try {
    strang_path(scenario::kTheta, {std::nan(""), 0.0}, 0.02, 10, rng);
    FAIL("expected a blow-up");
  } catch (const SimulationBlowupError& e) {
    CHECK(e.step() == 0);
  }
}

TEST_CASE("noise-free Strang path is second-order accurate") {
  const ModelParams p{0.1, 1.5, 0.8, 0.0};
  const double dt = 0.001;
  Rng rng = make_stream(1, 0);
  const Trajectory path = strang_path(p, {0.0, -0.5}, dt, 10'000, rng);
  const State ref = oracle::deterministic_path({0.0, -0.5}, 10.0, p);
  const double err = std::hypot(path.v.back() - ref.v, path.u.back() - ref.u);
  CHECK(err < 10.0 * dt * dt);
}

// The noise only drives u while the nonlinear subflow only depends on v, so the
// first-order error term cancels and the observed order is close to two.
TEST_CASE("strong self-convergence is at least first order") {
  const std::vector<double> steps{0.02, 0.01, 0.005, 0.0025};
  std::vector<double> errs;
  for (double dt : steps) errs.push_back(oracle::coupled_rms_error(scenario::kTheta, dt, 1.0, 200, 17));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double x = std::log(steps[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(steps.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  MESSAGE("strong order slope " << slope);
  CHECK(slope > 0.7);
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
}
