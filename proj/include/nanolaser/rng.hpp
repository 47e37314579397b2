#pragma once

#include <array>
#include <cstdint>

namespace nanolaser {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key), so a stream can be addressed at any position.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    constexpr std::uint32_t M0 = 0xD2511F53U, M1 = 0xCD9E8D57U;
    constexpr std::uint32_t W0 = 0x9E3779B9U, W1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += W0;
        key[1] += W1;
      }
      const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Standard-normal stream for one trajectory: key = master seed, high counter
/// words = trajectory index, low words = draw position. Distinct trajectories
/// never share counters, so results do not depend on scheduling.
class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
        stream_(stream_index) {}

  double next() {
    if (pos_ == buf_.size()) refill();
    return buf_[pos_++];
  }

  /// Uniform on (0, 1), independent of the normal buffer.
  double uniform() {
    const auto out = draw();
    return to_unit(out[0], out[1]);
  }

  std::uint64_t position() const { return counter_; }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Counter draw() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    ++counter_;
    return Philox4x32::generate(ctr, key_);
  }

  void refill();

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<double, 4> buf_{};
  std::size_t pos_ = 4;
};

/// Seed for an independent sub-run (sweep point, beta value) derived from the
/// master seed by SplitMix64 mixing.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(master) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

}  // namespace nanolaser
