#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace rankem {

/// Deterministic random source. The raw stream is std::mt19937_64 (whose
/// output sequence is fixed by the standard) and every distribution is
/// implemented here rather than with std::*_distribution, so identical seeds
/// yield bit-identical draws on every platform. Single-owner: never share an
/// instance across threads.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller (second draw cached).
  double normal();

  /// Draws an index from unnormalized non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  /// State round-trips through a text form (used by checkpoints).
  std::string serialize() const;
  static SeededRng deserialize(const std::string& text);

  bool operator==(const SeededRng& other) const {
    return engine_ == other.engine_ && has_spare_ == other.has_spare_ && spare_ == other.spare_;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rankem
