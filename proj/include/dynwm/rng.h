#pragma once

#include <array>
#include <cstdint>

#include "dynwm/linalg.h"

namespace dynwm {

/// Philox4x64-10 block function (Salmon et al., SC'11). Pure: the same
/// (counter, key) always yields the same four words.
std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> counter,
                                           std::array<std::uint64_t, 2> key);

/// Fixed sub-stream identifiers. Every trial draws each noise source from its
/// own stream so that runs differing only in the attack consume identical
/// process, sensor and watermark noise.
enum class Stream : std::uint64_t {
  kProcess = 1,
  kSensor1 = 2,
  kSensor2 = 3,
  kWatermark = 4,
  kAttack = 5,
  kReplayProcess = 6,
  kReplaySensor = 7,
};

/// Sequential view over one Philox stream keyed by (seed, stream id).
class NoiseStream {
 public:
  NoiseStream() = default;
  NoiseStream(std::uint64_t seed, Stream stream)
      : key_{seed, static_cast<std::uint64_t>(stream)} {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_unit();
  /// Independent uniforms on [-support_i, support_i].
  Vector uniform_box(const Eigen::Ref<const Vector>& support);

  std::uint64_t blocks_consumed() const { return block_; }

 private:
  std::array<std::uint64_t, 2> key_{0, 0};
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int buffered_ = 0;
};

/// Seed of trial `trial_id` in a batch started from `base_seed`.
std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial_id);

}  // namespace dynwm
