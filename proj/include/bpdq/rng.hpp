#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace bpdq {

/// splitmix64 step; used to expand seeds and to mix derived-seed parts.
std::uint64_t splitmix64_next(std::uint64_t& state);

/// Portable PRNG: xoshiro256++ seeded through splitmix64, with Gaussian
/// variates produced by Box-Muller (both outputs consumed in fixed order).
/// The whole chain is integer-exact, so identical seeds give identical
/// streams on every platform; Gaussian values additionally depend on the
/// platform libm in the last ulp.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_open0();

  /// Uniform integer in [0, bound), bias-free via rejection.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; cos branch first, sin branch cached.
  double gaussian();

  /// k distinct indices from {0, .., n-1}, returned sorted ascending.
  std::vector<long> sample_without_replacement(long n, long k);

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic seed derivation: folds the parts into the base seed with a
/// splitmix64-based combine. Used for per-trial / per-cell substreams.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

/// Name of the generator chain, recorded in serialized artifacts.
inline const char* rng_algorithm_name() { return "xoshiro256++/box-muller"; }

}  // namespace bpdq
