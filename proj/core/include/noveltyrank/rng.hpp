#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace noveltyrank {

/// Seeded random stream whose outputs are identical on every platform.
///
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// derived draws avoid std distributions, whose algorithms are left to the
/// library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool coin() { return (engine_() >> 63) != 0; }

  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  /// Independent child stream; `salt` distinguishes siblings.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

 private:
  std::mt19937_64 engine_;
};

}  // namespace noveltyrank
