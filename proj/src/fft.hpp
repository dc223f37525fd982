#pragma once

#include <span>
#include <vector>

namespace fhn::detail {

/// Squared DFT magnitudes |X_k|^2, k = 0..floor(n/2), of a real sequence.
/// Plans are created once per length and shared between threads.
void power_spectrum(std::span<const double> x, std::vector<double>& out);

}  // namespace fhn::detail
