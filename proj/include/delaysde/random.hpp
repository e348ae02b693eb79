#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace delaysde {

/**
 * Identifies one independent random stream.
 *
 * Streams are carved out of the Philox counter space: the master seed is the
 * key, the replication index and stream id occupy the two high counter words
 * and the low 64 bits count blocks. Distinct (replication, stream) pairs
 * therefore never overlap, whatever order they are consumed in.
 */
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  std::uint32_t stream = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Stream ids used across the library.
namespace streams {
inline constexpr std::uint32_t kSddePath = 0x100;     // + horizon index
inline constexpr std::uint32_t kLimitPath = 0x1000;   // + 2 * root index + part
inline constexpr std::uint32_t kAr1Shocks = 0x2000;
inline constexpr std::uint32_t kOuPath = 0x2001;
inline constexpr std::uint32_t kMartingale = 0x3000;  // + horizon index
}  // namespace streams

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to derive batch seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

/// UniformRandomBitGenerator over one Philox stream.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  explicit PhiloxEngine(StreamKey key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  const StreamKey& key() const { return key_; }

 private:
  StreamKey key_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 2;  // 64-bit words consumed from buffer_
};

}  // namespace delaysde
