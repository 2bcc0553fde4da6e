#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace authdrift {

// Stream derivation: independent, schedule-free seeds for sub-tasks
// (per category, per sample, ...).
std::uint64_t MixSeed(std::uint64_t x);
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream);
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view tag);

// mt19937_64 output is fixed by the standard; the distributions below are
// implemented here so generated data does not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t Below(std::uint64_t bound);
  double Uniform01();
  double Normal();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Uniform k-subset of [0, n) via Floyd's algorithm, returned in draw order.
// `scratch` is a caller-owned membership mask of size >= n, all zero on entry
// and restored to zero on exit.
std::vector<std::uint32_t> SampleSubset(Rng& rng, std::uint32_t n, std::uint32_t k,
                                        std::span<std::uint8_t> scratch);
std::vector<std::uint32_t> SampleSubset(Rng& rng, std::uint32_t n, std::uint32_t k);

}  // namespace authdrift
