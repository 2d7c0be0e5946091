#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace pnarm {

// Random source with fully specified transforms. The std:: distributions are
// implementation-defined, so every variate here is built from raw 64-bit
// engine output and gives the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1); never returns 0.
  double uniform_open();
  double normal();
  // Gamma with shape `a` and rate `b` (Marsaglia-Tsang).
  double gamma(double a, double b);
  // Inverse transform below rate 30, Hörmann's PTRS rejection above.
  std::int64_t poisson(double rate);
  // Index drawn with probability proportional to `weights` (nonnegative, not
  // all zero).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// SplitMix64 finaliser; used to derive independent seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace pnarm
