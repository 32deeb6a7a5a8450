#include "gridrisk/rng.hpp"

#include <cmath>
#include <numbers>

namespace gridrisk::rng {

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64: jump the state by (stream+1) increments, then finalize.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double NormalSampler::next_uniform() {
  // Top 53 bits, shifted into (0, 1]; the +1 keeps log() finite below.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double NormalSampler::operator()() {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gridrisk::rng
