#include "fhn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "fhn/errors.hpp"

namespace fhn {

std::vector<double> Population::weights() const {
  std::vector<double> w(particles.size());
  std::transform(particles.begin(), particles.end(), w.begin(), [](const Particle& p) { return p.weight; });
  return w;
}

std::string to_string(KernelKind kind) { return kind == KernelKind::standard ? "standard" : "olcm"; }

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "standard") return KernelKind::standard;
  if (name == "olcm") return KernelKind::olcm;
  throw ConfigError("unknown kernel '" + name + "'");
}

Mat4 weighted_covariance(const Population& pop) {
  Vec4 mean = Vec4::Zero();
  for (const auto& p : pop.particles) mean += p.weight * p.params.as_vector();
  Mat4 cov = Mat4::Zero();
  for (const auto& p : pop.particles) {
    const Vec4 d = p.params.as_vector() - mean;
    cov += p.weight * d * d.transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

namespace {

bool positive_definite(const Mat4& m) {
  Eigen::LLT<Mat4> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

Mat4 olcm_covariance(const ModelParams& center, const Population& prev, double delta_r) {
  double total = 0.0;
  for (const auto& p : prev.particles) {
    if (p.distance < delta_r) total += p.weight;
  }
  bool any = false;
  Mat4 cov = Mat4::Zero();
  const Vec4 c = center.as_vector();
  for (const auto& p : prev.particles) {
    if (!(p.distance < delta_r)) continue;
    any = true;
    const Vec4 d = p.params.as_vector() - c;
    const double mu = total > 0.0 ? p.weight / total : 0.0;
    cov += mu * d * d.transpose();
  }
  if (!any) throw EmptyTruncationError("olcm_covariance: no particle below the threshold");
  cov = 0.5 * (cov + cov.transpose());
  if (!positive_definite(cov)) cov.diagonal().array() += 1e-10 * (1.0 + cov.trace());
  return cov;
}

GaussianKernel GaussianKernel::from_covariance(const Mat4& cov) {
  if (!cov.allFinite()) throw NumericalError("gaussian kernel: non-finite covariance");
  Mat4 sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Mat4> llt(sym);
  double jitter = 1e-10 * (1.0 + std::abs(sym.trace()));
  for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
    if (attempt == 10) throw NumericalError("gaussian kernel: covariance not positive definite after jitter");
    sym = 0.5 * (cov + cov.transpose());
    sym.diagonal().array() += jitter;
    llt.compute(sym);
    jitter *= 2.0;
  }
  GaussianKernel k;
  k.cov_ = sym;
  k.lower_ = llt.matrixL();
  k.log_norm_ = -2.0 * std::log(2.0 * std::numbers::pi) - k.lower_.diagonal().array().log().sum();
  return k;
}

ModelParams GaussianKernel::sample(const ModelParams& mean, Rng& rng) const {
  std::normal_distribution<double> normal;
  Vec4 z;
  for (int i = 0; i < 4; ++i) z[i] = normal(rng);
  return ModelParams::from_vector(mean.as_vector() + lower_ * z);
}

double GaussianKernel::log_density(const ModelParams& point, const ModelParams& mean) const {
  const Vec4 d = point.as_vector() - mean.as_vector();
  const Vec4 y = lower_.triangularView<Eigen::Lower>().solve(d);
  return log_norm_ - 0.5 * y.squaredNorm();
}

double GaussianKernel::density(const ModelParams& point, const ModelParams& mean) const {
  return std::exp(log_density(point, mean));
}

ModelParams perturb(const ModelParams& mean, const Mat4& cov, Rng& rng) {
  const Mat4 sym = 0.5 * (cov + cov.transpose());
  Eigen::LDLT<Mat4> ldlt(sym);
  if (ldlt.info() == Eigen::Success) {
    const Vec4 d = ldlt.vectorD();
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    if (d.minCoeff() >= -1e-14 * scale) {
      std::normal_distribution<double> normal;
      Vec4 z;
      for (int i = 0; i < 4; ++i) z[i] = normal(rng);
      const Vec4 scaled = d.cwiseMax(0.0).cwiseSqrt().cwiseProduct(z);
      const Vec4 lz = ldlt.matrixL() * scaled;
      const Vec4 step = ldlt.transpositionsP().transpose() * lz;
      return ModelParams::from_vector(mean.as_vector() + step);
    }
  }
  return GaussianKernel::from_covariance(cov).sample(mean, rng);
}

double kernel_density(const ModelParams& point, const ModelParams& mean, const Mat4& cov) {
  const Mat4 sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Mat4> llt(sym);
  if (llt.info() != Eigen::Success) throw NumericalError("kernel_density: covariance not positive definite");
  const Mat4 lower = llt.matrixL();
  const Vec4 y = lower.triangularView<Eigen::Lower>().solve(point.as_vector() - mean.as_vector());
  const double log_norm = -2.0 * std::log(2.0 * std::numbers::pi) - lower.diagonal().array().log().sum();
  return std::exp(log_norm - 0.5 * y.squaredNorm());
}

std::vector<double> update_weights(std::span<const ModelParams> new_particles, const Population& prev,
                                   std::span<const GaussianKernel> kernels, const PriorSpec& prior) {
  const std::size_t n_prev = prev.particles.size();
  if (kernels.size() != 1 && kernels.size() != n_prev) {
    throw Error("update_weights: need one shared kernel or one kernel per previous particle");
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_w(new_particles.size(), kNegInf);
  std::vector<double> terms(n_prev);
  for (std::size_t j = 0; j < new_particles.size(); ++j) {
    const double pi = prior_density(prior, new_particles[j]);
    if (!(pi > 0.0)) continue;
    // log sum_l w_l k_l(theta_j | theta_l), accumulated stably.
    double top = kNegInf;
    for (std::size_t l = 0; l < n_prev; ++l) {
      const auto& prev_l = prev.particles[l];
      const GaussianKernel& k = kernels.size() == 1 ? kernels[0] : kernels[l];
      terms[l] = prev_l.weight > 0.0 ? std::log(prev_l.weight) + k.log_density(new_particles[j], prev_l.params)
                                     : kNegInf;
      top = std::max(top, terms[l]);
    }
    if (top == kNegInf) continue;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    log_w[j] = std::log(pi) - (top + std::log(sum));
  }
  const double top = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(top)) throw DegeneratePopulationError("update_weights: all unnormalized weights are zero");
  std::vector<double> w(log_w.size());
  double total = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::exp(log_w[j] - top);
    total += w[j];
  }
  for (double& x : w) x /= total;
  return w;
}

double ess(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return 1.0 / s;
}

}  // namespace fhn
