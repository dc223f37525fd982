#include "fft.hpp"

#include <complex>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "fhn/errors.hpp"

namespace fhn::detail {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan r2c(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> in(n);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw NumericalError("fftw: could not create plan");
    plans_.emplace(n, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void power_spectrum(std::span<const double> x, std::vector<double>& out) {
  const std::size_t n = x.size();
  fftw_plan plan = cache().r2c(n);
  std::vector<double> in(x.begin(), x.end());
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(), reinterpret_cast<fftw_complex*>(spec.data()));
  out.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) out[k] = std::norm(spec[k]);
}

}  // namespace fhn::detail
