#pragma once

#include <cmath>
#include <cstdint>

namespace pdpsim {

/// Counter-based generator: Philox4x32-10.
///
/// A stream is addressed by (key, stream_id); draws within a stream walk a
/// 64-bit counter. Streams derived from the same key with distinct ids are
/// independent by construction, which is what makes ensemble output
/// independent of worker count: trajectory i always consumes the stream
/// (master_seed, i) regardless of which thread runs it.
class Philox {
 public:
  Philox(std::uint64_t key, std::uint64_t stream) noexcept
      : key0_(static_cast<std::uint32_t>(key)),
        key1_(static_cast<std::uint32_t>(key >> 32)),
        stream_(stream) {}

  std::uint64_t next_u64() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    ++counter_;

    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(c0);
      const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(c2);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    spare_ = (static_cast<std::uint64_t>(c2) << 32) | c3;
    have_spare_ = true;
    return (static_cast<std::uint64_t>(c0) << 32) | c1;
  }

  /// Uniform draw in the open interval (0, 1).
  double uniform01() noexcept {
    const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Unit-exponential draw via inverse CDF.
  double exponential() noexcept { return -std::log(uniform01()); }

  std::uint64_t stream_id() const noexcept { return stream_; }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t key0_;
  std::uint32_t key1_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

/// Stream-id layout used across the project so that distinct purposes
/// (per-scale SSA ensembles, PDP reference ensembles, auxiliary draws)
/// never collide: purpose in the top 16 bits, a group index in the middle
/// 16, the trajectory index in the low 32.
inline std::uint64_t stream_id(std::uint32_t purpose, std::uint32_t group,
                               std::uint32_t trajectory) noexcept {
  return (static_cast<std::uint64_t>(purpose) << 48) |
         (static_cast<std::uint64_t>(group & 0xFFFFu) << 32) | trajectory;
}

}  // namespace pdpsim
