#pragma once

#include <array>
#include <cstdint>

namespace divmkt {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Inverse of the standard normal CDF (Wichura, AS 241, double precision).
// Requires 0 < u < 1.
double normal_quantile(double u);

// Stateless normal variates addressed by (seed, path, step, coordinate).
// Each Philox block yields two variates, so coordinates 2k and 2k+1 share a block.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : seed_(seed) {}

  double standard_normal(std::uint64_t path, std::uint64_t step, std::uint64_t coordinate) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace divmkt
