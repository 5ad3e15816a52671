#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace belllab {

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Stream purposes.  Each purpose owns a disjoint range of stream ids, so
/// independent consumers of the same seed never share random numbers.
enum class StreamKind : std::uint16_t {
  kGeneric = 0,
  kEventReady = 1,
  kSourcePairs = 2,
  kDarkA = 3,
  kDarkB = 4,
  kSweep = 5,
  kTrials = 6,
};

inline constexpr std::uint64_t stream_id(StreamKind kind, std::uint64_t index) {
  return (static_cast<std::uint64_t>(kind) << 48) | (index & ((std::uint64_t{1} << 48) - 1));
}

/// Counter-based random stream keyed by (seed, stream id).  Draw i of a
/// stream is a pure function of (seed, stream, i); no state is shared between
/// streams, which makes chunked parallel generation independent of the
/// number of workers.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    if (have_ == 0) refill();
    return buffer_[--have_];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_open_low() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per pair of draws; the partner
  /// is discarded to keep the draw count per call fixed).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open_low()));
    return r * std::cos(2.0 * std::numbers::pi * uniform());
  }

  double exponential(double rate) { return -std::log(uniform_open_low()) / rate; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t blocks_used() const { return counter_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int have_ = 0;
};

}  // namespace belllab
