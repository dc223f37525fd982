#pragma once

#include <cstdint>
#include <random>

namespace fhn {

using Rng = std::mt19937_64;

/// Mixes a run seed with a (stream, slot) key into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot = 0);

/// Random stream keyed by (seed, stream, slot); identical keys give identical streams.
Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot = 0);

}  // namespace fhn
