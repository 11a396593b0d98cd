#pragma once

#include <cstdint>
#include <random>

#include "kinodiff/numerics/tensor.hpp"

namespace kinodiff::numerics {

/// Seeded generator. The engine is std::mt19937_64, whose output sequence is
/// fixed by the standard; uniform and normal transforms are implemented here
/// so streams are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal (Box-Muller, one draw per call).
  double normal();
  Tensor normal_tensor(const Shape& shape);

  /// Independent child stream, a pure function of (seed, stream).
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace kinodiff::numerics
