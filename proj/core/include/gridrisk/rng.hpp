#pragma once

#include <cstdint>
#include <random>

namespace gridrisk::rng {

/// Mixes a master seed with a stream index (splitmix64 finalizer) so that
/// ensemble fan-out gets reproducible, statistically independent per-path
/// streams. mix_seed(s, 0), mix_seed(s, 1), ... never collide for fixed s.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream);

/// Standard normal draws from a seeded mt19937_64.
///
/// Box-Muller on explicit 53-bit uniforms, exactly two engine outputs per
/// draw. The mt19937_64 sequence is fixed by the standard and no
/// std::*_distribution is involved, so the draw sequence for a given seed
/// does not depend on the standard library implementation.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()();

 private:
  double next_uniform();  // (0, 1]

  std::mt19937_64 engine_;
};

}  // namespace gridrisk::rng
