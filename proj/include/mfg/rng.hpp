#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mfg {

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of the named sub-stream (label, index) of a run seed.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view label, std::uint64_t index);

/// Per-task random stream. Draws are computed by hand from the 64-bit engine
/// output (std distributions differ between standard libraries).
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view label, std::uint64_t index)
      : engine_(substream_seed(seed, label, index)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mfg
