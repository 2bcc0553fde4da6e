#include "core/rng.hpp"

#include <cmath>
#include <numbers>

namespace authdrift {

std::uint64_t MixSeed(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream) {
  return MixSeed(MixSeed(master) ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t DeriveSeed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return DeriveSeed(master, h);
}

std::uint64_t Rng::Below(std::uint64_t bound) {
  // Lemire's nearly-divisionless method.
  std::uint64_t x = Next();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      x = Next();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::Uniform01() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

double Rng::Normal() {
  double u1 = Uniform01();
  while (u1 <= 0.0) u1 = Uniform01();
  const double u2 = Uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::uint32_t> SampleSubset(Rng& rng, std::uint32_t n, std::uint32_t k,
                                        std::span<std::uint8_t> scratch) {
  std::vector<std::uint32_t> chosen;
  if (k > n) k = n;
  chosen.reserve(k);
  for (std::uint32_t j = n - k; j < n; ++j) {
    auto t = static_cast<std::uint32_t>(rng.Below(static_cast<std::uint64_t>(j) + 1));
    if (scratch[t]) t = j;
    scratch[t] = 1;
    chosen.push_back(t);
  }
  for (auto idx : chosen) scratch[idx] = 0;
  return chosen;
}

std::vector<std::uint32_t> SampleSubset(Rng& rng, std::uint32_t n, std::uint32_t k) {
  std::vector<std::uint8_t> scratch(n, 0);
  return SampleSubset(rng, n, k, scratch);
}

}  // namespace authdrift
