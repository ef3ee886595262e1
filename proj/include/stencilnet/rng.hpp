#pragma once

#include <cstdint>

namespace stencilnet {

// SplitMix64 generator. Small state, full 64-bit period, and trivially
// splittable: independent per-case streams are derived by offsetting the
// base seed with multiples of the golden-ratio increment before mixing,
// so draw order within one case never perturbs any other case.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  // Stream for training case `case_index` under a shared base seed.
  static SplitMix64 for_case(std::uint64_t seed, std::uint64_t case_index) {
    return SplitMix64(seed + (case_index + 1) * kGolden);
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1): (x>>11 + 1/2) * 2^-53.
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (-1,1), endpoints excluded.
  double next_symmetric() { return 2.0 * next_unit_open() - 1.0; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  std::uint64_t state_;
};

}  // namespace stencilnet
