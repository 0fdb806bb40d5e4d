#pragma once

#include <array>
#include <cstdint>

namespace histoband {

/// One Philox4x32-10 block: 128-bit counter, 64-bit key, 128 output bits.
/// Matches the published test vectors for this generator.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based Philox4x32-10 stream.
///
/// The 128-bit counter is laid out as {block_lo, block_hi, replication,
/// stage}: every (replication, stage) pair under a fixed seed is an
/// independent stream, which is what makes simulation output invariant to
/// how replications are scheduled across workers.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint32_t replication, std::uint32_t stage);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller; the spare deviate is cached.
  double normal();

 private:
  std::array<std::uint32_t, 4> run_block();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_ = 0;
  std::uint32_t replication_;
  std::uint32_t stage_;

  std::array<std::uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;  // empty

  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Stage labels so callers never collide on (replication, stage) by accident.
namespace rng_stage {
constexpr std::uint32_t kCovariates = 0;
constexpr std::uint32_t kNoise = 1;
constexpr std::uint32_t kAux = 2;
}  // namespace rng_stage

}  // namespace histoband
