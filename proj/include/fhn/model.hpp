#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "fhn/random.hpp"

/**
 * \file
 * \brief Stochastic FitzHugh-Nagumo model and its Strang splitting simulator.
 *
 * The model is
 *
 *   dV = (V - V^3 - U) / epsilon dt
 *   dU = (gamma V - U + beta) dt + sigma dW
 *
 * The drift splits into the linear part A x with A = ((0, -1/epsilon), (gamma, -1))
 * and the nonlinear remainder ((V - V^3)/epsilon, beta). Both subequations are
 * solved exactly: the linear SDE through its matrix exponential and covariance,
 * the ODE through a closed-form flow. Only the weakly damped regime
 * (kappa = 4 gamma / epsilon - 1 > 0) is supported.
 */

namespace fhn {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

/// theta = (epsilon, gamma, beta, sigma).
struct ModelParams {
  double epsilon = 0.0;  ///< time-scale separation
  double gamma = 0.0;    ///< spike duration
  double beta = 0.0;     ///< spike position
  double sigma = 0.0;    ///< noise intensity

  bool all_positive() const {
    return epsilon > 0.0 && gamma > 0.0 && beta > 0.0 && sigma > 0.0;
  }
  Eigen::Vector4d as_vector() const { return {epsilon, gamma, beta, sigma}; }
  static ModelParams from_vector(const Eigen::Vector4d& x) { return {x[0], x[1], x[2], x[3]}; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Membrane voltage and recovery variable.
struct State {
  double v = 0.0;
  double u = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

/// Equidistant path; entry 0 is the initial state.
struct Trajectory {
  double step = 0.0;
  std::vector<double> v;
  std::vector<double> u;  ///< empty when only the observed coordinate was kept

  std::size_t steps() const { return v.empty() ? 0 : v.size() - 1; }
};

/// kappa = 4 gamma / epsilon - 1; positive in the weakly damped regime.
double kappa(const ModelParams& params);

/// Drift matrix A of the linear subequation.
Mat2 drift_matrix(const ModelParams& params);

/// E(t) = exp(A t) and the covariance C(t) of the exact linear SDE step.
struct LinearMatrices {
  Mat2 expm;
  Mat2 cov;
};

/// Closed-form E(t) and C(t). Throws UnsupportedRegimeError when kappa <= 0.
LinearMatrices linear_matrices(const ModelParams& params, double t);

/// Exact flow of dv = (v - v^3)/epsilon, du = beta over time t >= 0.
State ode_flow(State x, double t, const ModelParams& params);

/// Full drift F(x) of the model.
Vec2 drift(State x, const ModelParams& params);

/// Lower-triangular L with L L^T = cov. Falls back to a diagonal jitter of
/// 1e-12 * trace when the strict factorization fails, and to a semidefinite
/// factor when even that fails (e.g. cov == 0).
Mat2 covariance_factor(const Mat2& cov);

/// One Strang step x -> h(E(dt) h(x; dt/2) + xi; dt/2) with E(dt), the noise
/// factor and the half-step flow constant precomputed.
class StrangStepper {
 public:
  StrangStepper(const ModelParams& params, double step);

  /// Advance with an explicit noise increment xi ~ N(0, C(step)).
  State advance(State x, const Vec2& xi) const;

  /// Advance drawing xi = L z from two standard normal draws.
  template <class Normal>
  State advance(State x, Rng& rng, Normal& normal) const {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    return advance(x, Vec2(factor_(0, 0) * z1, factor_(1, 0) * z1 + factor_(1, 1) * z2));
  }

  State half_flow(State x) const;

  const Mat2& expm() const { return expm_; }
  const Mat2& cov() const { return cov_; }
  const Mat2& factor() const { return factor_; }
  double step() const { return step_; }

 private:
  double step_;
  double beta_half_step_;
  double decay_;  // exp(-step / epsilon), i.e. exp(-2 (step/2) / epsilon)
  Mat2 expm_;
  Mat2 cov_;
  Mat2 factor_;
};

/// Strang splitting path of n steps from x0. Throws SimulationBlowupError
/// carrying the step index when a state becomes non-finite.
Trajectory strang_path(const ModelParams& params, State x0, double step, std::size_t n, Rng& rng);

/// Voltage-only variant used by the inference engine: keeps v at every
/// stride-th step (index 0 included), so the result has n / stride + 1 entries.
std::vector<double> strang_voltage(const ModelParams& params, State x0, double step, std::size_t n,
                                   std::size_t stride, Rng& rng);

}  // namespace fhn
