#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fas {

/// Counter-based random stream.
///
/// Draw n of stream (seed, label) is a pure function of seed, label and n:
/// the key is derived from the seed and an FNV-1a hash of the label, and each
/// draw runs the SplitMix64 finalizer over key + n·golden. Nothing depends on
/// the standard library's distributions, so sequences are identical across
/// platforms. Sub-streams (per epoch, per sample) are derived with child().
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  /// Independent stream keyed by this stream's key and an index.
  RngStream child(std::uint64_t index) const;
  RngStream child(std::string_view label) const;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one variate per two draws).
  double normal() noexcept;
  /// Uniform integer on [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  RngStream(std::uint64_t seed, std::string label, std::uint64_t key);

  std::uint64_t seed_;
  std::string label_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

}  // namespace fas
