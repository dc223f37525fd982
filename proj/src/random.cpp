#include "fhn/random.hpp"

namespace fhn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (slot * 0xd1b54a32d192ed03ULL));
  return h;
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t slot) {
  std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(seed, stream, slot)),
                    static_cast<std::uint32_t>(derive_seed(seed, stream, slot) >> 32)};
  return Rng(seq);
}

}  // namespace fhn
