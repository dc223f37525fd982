#include "fhn/priors.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fhn/errors.hpp"

namespace fhn {

std::string to_string(PriorFamily family) {
  switch (family) {
    case PriorFamily::uniform_conditional:
      return "uniform_conditional";
    case PriorFamily::lognormal:
      return "lognormal";
    case PriorFamily::exponential:
      return "exponential";
  }
  return "unknown";
}

PriorFamily parse_prior_family(const std::string& name) {
  if (name == "uniform_conditional" || name == "uniform") return PriorFamily::uniform_conditional;
  if (name == "lognormal") return PriorFamily::lognormal;
  if (name == "exponential") return PriorFamily::exponential;
  throw ConfigError("unknown prior family '" + name + "'");
}

PriorSpec::PriorSpec(PriorFamily family, std::vector<double> hyper)
    : family_(family), hyper_(std::move(hyper)) {
  const auto expect = [&](std::size_t n) {
    if (hyper_.size() != n) {
      throw ConfigError(to_string(family_) + " prior expects " + std::to_string(n) + " hyperparameters, got " +
                        std::to_string(hyper_.size()));
    }
  };
  for (double h : hyper_) {
    if (!std::isfinite(h)) throw ConfigError("prior hyperparameters must be finite");
  }
  switch (family_) {
    case PriorFamily::uniform_conditional: {
      expect(7);
      const auto& h = hyper_;
      if (!(h[0] > 0.0 && h[0] < h[1])) throw ConfigError("uniform prior: need 0 < eps_lo < eps_hi");
      if (!(h[2] > h[1] / 4.0)) throw ConfigError("uniform prior: gamma_hi must exceed eps_hi / 4");
      if (!(h[3] >= 0.0 && h[3] < h[4])) throw ConfigError("uniform prior: need 0 <= beta_lo < beta_hi");
      if (!(h[5] >= 0.0 && h[5] < h[6])) throw ConfigError("uniform prior: need 0 <= sigma_lo < sigma_hi");
      break;
    }
    case PriorFamily::lognormal:
      expect(8);
      for (std::size_t i = 1; i < 8; i += 2) {
        if (!(hyper_[i] > 0.0)) throw ConfigError("lognormal prior: scales must be positive");
      }
      break;
    case PriorFamily::exponential:
      expect(4);
      for (double r : hyper_) {
        if (!(r > 0.0)) throw ConfigError("exponential prior: rates must be positive");
      }
      break;
  }
}

PriorSpec PriorSpec::simulation_study() {
  return {PriorFamily::uniform_conditional, {0.01, 0.5, 6.0, 0.01, 6.0, 0.01, 1.0}};
}

PriorSpec PriorSpec::recordings() {
  return {PriorFamily::uniform_conditional, {0.01, 1.0, 10.0, 0.01, 10.0, 0.01, 3.0}};
}

PriorSpec PriorSpec::lognormal_default() {
  return {PriorFamily::lognormal, {0.0, 1.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.75}};
}

PriorSpec PriorSpec::exponential_default() { return {PriorFamily::exponential, {3.0, 0.5, 0.5, 1.0}}; }

ModelParams prior_sample(const PriorSpec& spec, Rng& rng) {
  const auto& h = spec.hyper();
  std::array<double, 4> x{};
  switch (spec.family()) {
    case PriorFamily::uniform_conditional: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      x[0] = h[0] + (h[1] - h[0]) * unit(rng);
      const double glo = x[0] / 4.0;
      // uniform_real_distribution can return its lower end; gamma must stay strictly above eps/4.
      do {
        x[1] = glo + (h[2] - glo) * unit(rng);
      } while (!(x[1] > glo));
      x[2] = h[3] + (h[4] - h[3]) * unit(rng);
      x[3] = h[5] + (h[6] - h[5]) * unit(rng);
      break;
    }
    case PriorFamily::lognormal:
      for (std::size_t i = 0; i < 4; ++i) {
        std::lognormal_distribution<double> d(h[2 * i], h[2 * i + 1]);
        x[i] = d(rng);
      }
      break;
    case PriorFamily::exponential:
      for (std::size_t i = 0; i < 4; ++i) {
        std::exponential_distribution<double> d(h[i]);
        x[i] = d(rng);
      }
      break;
  }
  return {x[0], x[1], x[2], x[3]};
}

double prior_density(const PriorSpec& spec, const ModelParams& p) {
  const auto& h = spec.hyper();
  const std::array<double, 4> x{p.epsilon, p.gamma, p.beta, p.sigma};
  switch (spec.family()) {
    case PriorFamily::uniform_conditional: {
      const double glo = p.epsilon / 4.0;
      const bool inside = p.epsilon >= h[0] && p.epsilon <= h[1] && p.gamma > glo && p.gamma <= h[2] &&
                          p.beta >= h[3] && p.beta <= h[4] && p.sigma >= h[5] && p.sigma <= h[6];
      if (!inside) return 0.0;
      return 1.0 / ((h[1] - h[0]) * (h[2] - glo) * (h[4] - h[3]) * (h[6] - h[5]));
    }
    case PriorFamily::lognormal: {
      double d = 1.0;
      for (std::size_t i = 0; i < 4; ++i) {
        if (!(x[i] > 0.0)) return 0.0;
        const double z = (std::log(x[i]) - h[2 * i]) / h[2 * i + 1];
        d *= std::exp(-0.5 * z * z) / (x[i] * h[2 * i + 1] * std::sqrt(2.0 * std::numbers::pi));
      }
      return d;
    }
    case PriorFamily::exponential: {
      double d = 1.0;
      for (std::size_t i = 0; i < 4; ++i) {
        if (!(x[i] > 0.0)) return 0.0;
        d *= h[i] * std::exp(-h[i] * x[i]);
      }
      return d;
    }
  }
  return 0.0;
}

}  // namespace fhn
