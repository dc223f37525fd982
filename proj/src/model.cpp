#include "fhn/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fhn/errors.hpp"

namespace fhn {

double kappa(const ModelParams& params) { return 4.0 * params.gamma / params.epsilon - 1.0; }

Mat2 drift_matrix(const ModelParams& params) {
  Mat2 a;
  a << 0.0, -1.0 / params.epsilon, params.gamma, -1.0;
  return a;
}

LinearMatrices linear_matrices(const ModelParams& params, double t) {
  const double k = kappa(params);
  if (!(k > 0.0)) {
    throw UnsupportedRegimeError("linear_matrices: kappa = " + std::to_string(k) +
                                 " <= 0 (only the weakly damped regime is supported)");
  }
  if (t < 0.0) {
    throw Error("linear_matrices: negative time");
  }
  const double eps = params.epsilon;
  const double gam = params.gamma;
  const double sk = std::sqrt(k);

  LinearMatrices out;
  const double half = 0.5 * sk * t;
  const double ch = std::cos(half);
  const double sh = std::sin(half);
  const double damp = std::exp(-0.5 * t);
  out.expm << damp * (ch + sh / sk), -damp * 2.0 * sh / (eps * sk),
      damp * 2.0 * gam * sh / sk, damp * (ch - sh / sk);

  // kappa e^t - 4 gamma / epsilon == kappa expm1(t) - 1 and 1 - cos(a) == 2 sin^2(a/2);
  // written this way the O(kappa t) terms cancel analytically for small t.
  const double a = sk * t;
  const double sa = std::sin(a);
  const double one_minus_cos = 2.0 * sh * sh;
  const double grow = k * std::expm1(t);
  const double s2 = params.sigma * params.sigma * std::exp(-t);
  const double c11 = s2 / (2.0 * eps * gam * k) * (grow - one_minus_cos - sk * sa);
  const double c12 = -s2 / (k * eps) * one_minus_cos;
  const double c22 = s2 / (2.0 * k) * (grow - one_minus_cos + sk * sa);
  out.cov << c11, c12, c12, c22;
  return out;
}

State ode_flow(State x, double t, const ModelParams& params) {
  const double decay = std::exp(-2.0 * t / params.epsilon);
  const double grow = -std::expm1(-2.0 * t / params.epsilon);
  return {x.v / std::sqrt(decay + x.v * x.v * grow), params.beta * t + x.u};
}

Vec2 drift(State x, const ModelParams& params) {
  return {(x.v - x.v * x.v * x.v - x.u) / params.epsilon, params.gamma * x.v - x.u + params.beta};
}

namespace {

bool try_cholesky(const Mat2& c, Mat2& l) {
  if (!(c(0, 0) > 0.0)) return false;
  const double l11 = std::sqrt(c(0, 0));
  const double l21 = c(1, 0) / l11;
  const double rest = c(1, 1) - l21 * l21;
  if (!(rest > 0.0)) return false;
  l << l11, 0.0, l21, std::sqrt(rest);
  return true;
}

}  // namespace

Mat2 covariance_factor(const Mat2& cov) {
  Mat2 l = Mat2::Zero();
  if (try_cholesky(cov, l)) return l;
  const double jitter = 1e-12 * cov.trace();
  if (jitter > 0.0 && try_cholesky(cov + jitter * Mat2::Identity(), l)) return l;
  // Semidefinite fallback: clamp what is left after the first column.
  const double l11 = std::sqrt(std::max(cov(0, 0), 0.0));
  const double l21 = l11 > 0.0 ? cov(1, 0) / l11 : 0.0;
  l << l11, 0.0, l21, std::sqrt(std::max(cov(1, 1) - l21 * l21, 0.0));
  return l;
}

StrangStepper::StrangStepper(const ModelParams& params, double step)
    : step_(step),
      beta_half_step_(0.5 * step * params.beta),
      decay_(std::exp(-step / params.epsilon)) {
  if (!(step > 0.0)) throw Error("StrangStepper: step must be positive");
  const LinearMatrices m = linear_matrices(params, step);
  expm_ = m.expm;
  cov_ = m.cov;
  factor_ = covariance_factor(cov_);
}

State StrangStepper::half_flow(State x) const {
  return {x.v / std::sqrt(decay_ + x.v * x.v * (1.0 - decay_)), x.u + beta_half_step_};
}

State StrangStepper::advance(State x, const Vec2& xi) const {
  const State a = half_flow(x);
  const State b{expm_(0, 0) * a.v + expm_(0, 1) * a.u + xi[0],
                expm_(1, 0) * a.v + expm_(1, 1) * a.u + xi[1]};
  return half_flow(b);
}

namespace {

void check_finite(State x, std::size_t step) {
  if (!std::isfinite(x.v) || !std::isfinite(x.u)) {
    throw SimulationBlowupError(step, "strang path: non-finite state at step " + std::to_string(step));
  }
}

}  // namespace

Trajectory strang_path(const ModelParams& params, State x0, double step, std::size_t n, Rng& rng) {
  if (n == 0) throw Error("strang_path: need at least one step");
  const StrangStepper stepper(params, step);
  std::normal_distribution<double> normal;
  Trajectory path;
  path.step = step;
  path.v.resize(n + 1);
  path.u.resize(n + 1);
  State x = x0;
  check_finite(x, 0);
  path.v[0] = x.v;
  path.u[0] = x.u;
  for (std::size_t i = 1; i <= n; ++i) {
    x = stepper.advance(x, rng, normal);
    check_finite(x, i);
    path.v[i] = x.v;
    path.u[i] = x.u;
  }
  return path;
}

std::vector<double> strang_voltage(const ModelParams& params, State x0, double step, std::size_t n,
                                   std::size_t stride, Rng& rng) {
  if (n == 0) throw Error("strang_voltage: need at least one step");
  if (stride == 0 || n % stride != 0) {
    throw Error("strang_voltage: stride must divide the number of steps");
  }
  const StrangStepper stepper(params, step);
  std::normal_distribution<double> normal;
  std::vector<double> out;
  out.reserve(n / stride + 1);
  State x = x0;
  check_finite(x, 0);
  out.push_back(x.v);
  for (std::size_t i = 1; i <= n; ++i) {
    x = stepper.advance(x, rng, normal);
    if (i % stride == 0) {
      check_finite(x, i);
      out.push_back(x.v);
    }
  }
  check_finite(x, n);
  return out;
}

}  // namespace fhn
