#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fhn/model.hpp"
#include "fhn/priors.hpp"
#include "fhn/random.hpp"

namespace fhn {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

struct Particle {
  ModelParams params;
  double weight = 0.0;
  double distance = 0.0;
};

/// Weighted particle set of one SMC iteration; weights sum to one.
struct Population {
  std::vector<Particle> particles;
  int iteration = 0;
  double threshold = 0.0;

  std::size_t size() const { return particles.size(); }
  std::vector<double> weights() const;
};

enum class KernelKind { standard, olcm };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& name);

/// sum_j w_j (theta_j - mu)(theta_j - mu)^T with mu the weighted mean; no bias correction.
Mat4 weighted_covariance(const Population& pop);

/// Optimal local covariance around `center`: weighted scatter of the previous
/// particles whose distance is below delta_r, with their weights renormalized.
/// A diagonal jitter of 1e-10 * (1 + trace) is added when the scatter is not
/// positive definite. Throws EmptyTruncationError when no particle qualifies.
Mat4 olcm_covariance(const ModelParams& center, const Population& prev, double delta_r);

/// Multivariate normal proposal with a fixed covariance, factorized once.
class GaussianKernel {
 public:
  /// Cholesky factorization; if it fails the diagonal is inflated by
  /// 1e-10 * (1 + trace), doubling up to 10 attempts, before giving up with
  /// NumericalError.
  static GaussianKernel from_covariance(const Mat4& cov);

  ModelParams sample(const ModelParams& mean, Rng& rng) const;
  double density(const ModelParams& point, const ModelParams& mean) const;
  double log_density(const ModelParams& point, const ModelParams& mean) const;

  /// Covariance actually used, i.e. after any jitter.
  const Mat4& covariance() const { return cov_; }

 private:
  Mat4 cov_;
  Mat4 lower_;
  double log_norm_ = 0.0;
};

/// One draw from N(mean, cov). Semidefinite covariances are sampled exactly
/// (a zero covariance returns the mean); indefinite ones go through the jitter policy.
ModelParams perturb(const ModelParams& mean, const Mat4& cov, Rng& rng);

/// N(mean, cov) density at point; throws NumericalError when cov is not positive definite.
double kernel_density(const ModelParams& point, const ModelParams& mean, const Mat4& cov);

/// Normalized importance weights
///   w_j ∝ prior(theta_j) / sum_l w_prev_l k(theta_j | theta_prev_l).
/// `kernels` holds one shared kernel (standard) or one per previous particle (olcm).
/// Throws DegeneratePopulationError when every unnormalized weight is zero.
std::vector<double> update_weights(std::span<const ModelParams> new_particles, const Population& prev,
                                   std::span<const GaussianKernel> kernels, const PriorSpec& prior);

/// Effective sample size 1 / sum w^2 of normalized weights.
double ess(std::span<const double> weights);

}  // namespace fhn
