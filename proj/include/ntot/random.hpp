#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace ntot {

/// Identity of the random stream, recorded in every output header.
inline constexpr std::string_view kGeneratorId = "mt19937_64/box-muller/v1";

/// Seeded stream with platform-independent output: std::mt19937_64 (its
/// sequence is fixed by the standard) plus hand-rolled conversions, since the
/// standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Box–Muller transform (pairs are cached).
  double normal();
  /// Uniform integer in [0, bound), unbiased by rejection. bound >= 1.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of trial `trial` at grid point `grid_point`:
/// base ^ splitmix64((grid_point << 32) ^ trial ^ 0x9e3779b97f4a7c15).
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t grid_point, std::uint64_t trial);

}  // namespace ntot
