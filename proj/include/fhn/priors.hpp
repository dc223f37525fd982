#pragma once

#include <array>
#include <string>
#include <vector>

#include "fhn/model.hpp"
#include "fhn/random.hpp"

namespace fhn {

enum class PriorFamily { uniform_conditional, lognormal, exponential };

std::string to_string(PriorFamily family);
PriorFamily parse_prior_family(const std::string& name);

/// Product prior over (epsilon, gamma, beta, sigma).
///
/// Hyperparameter layout, in order:
///  - uniform_conditional: eps_lo, eps_hi, gamma_hi, beta_lo, beta_hi, sigma_lo, sigma_hi
///    (gamma | epsilon ~ U(epsilon / 4, gamma_hi), which keeps kappa > 0)
///  - lognormal: (location, scale) of log(parameter) for each of the four parameters
///  - exponential: rate of each of the four parameters
class PriorSpec {
 public:
  PriorSpec(PriorFamily family, std::vector<double> hyper);

  /// eps ~ U(0.01, 0.5), gamma | eps ~ U(eps/4, 6), beta ~ U(0.01, 6), sigma ~ U(0.01, 1).
  static PriorSpec simulation_study();
  /// eps ~ U(0.01, 1), gamma | eps ~ U(eps/4, 10), beta ~ U(0.01, 10), sigma ~ U(0.01, 3).
  static PriorSpec recordings();
  /// LogN(0, 1), LogN(0, 1/2), LogN(0, 1), LogN(0, 3/4).
  static PriorSpec lognormal_default();
  /// Exp(3), Exp(1/2), Exp(1/2), Exp(1).
  static PriorSpec exponential_default();

  PriorFamily family() const { return family_; }
  const std::vector<double>& hyper() const { return hyper_; }

 private:
  PriorFamily family_;
  std::vector<double> hyper_;
};

ModelParams prior_sample(const PriorSpec& spec, Rng& rng);

/// Joint prior density; exactly 0 outside the support.
double prior_density(const PriorSpec& spec, const ModelParams& params);

}  // namespace fhn
