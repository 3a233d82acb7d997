#pragma once

#include <array>
#include <cstdint>

namespace blmmse {

/// Philox4x32-10 counter-based block cipher (Salmon et al., Random123).
/// A (key, counter) pair maps to four independent 32-bit words.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Tags separating the random components drawn for one sample index.
enum class StreamTag : std::uint32_t {
  signal = 1,
  kernel = 2,
  noise = 3,
  operator_draw = 4,
  misc = 5,
};

/// Deterministic generator keyed by a seed and a 64-bit stream id.
///
/// Draw k of stream s under seed S is Philox(key=S, counter=(k, s)), so any
/// (seed, stream) pair can be regenerated independently of the order in
/// which streams are consumed. Gaussians use the Box-Muller transform on
/// two open-interval uniforms.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) noexcept;

  /// Substream for one (sample index, component) pair.
  static Rng substream(std::uint64_t seed, std::uint64_t index, StreamTag tag) noexcept;

  std::uint32_t next_u32() noexcept;
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  double normal() noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  std::uint64_t block_ = 0;
  std::uint64_t stream_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to derive child seeds from (seed, a, b).
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace blmmse
