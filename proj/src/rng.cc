#include "dynwm/rng.h"

namespace dynwm {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

constexpr std::uint64_t kTrialSeedDomain = 0x7472'6961'6c5f'7364ULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  const unsigned __int128 product =
      static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
  hi = static_cast<std::uint64_t>(product >> 64);
  lo = static_cast<std::uint64_t>(product);
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> ctr,
                                           std::array<std::uint64_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t NoiseStream::next_u64() {
  if (buffered_ == 0) {
    buffer_ = philox4x64_10({block_, 0, 0, 0}, key_);
    ++block_;
    buffered_ = 4;
  }
  return buffer_[4 - buffered_--];
}

double NoiseStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

Vector NoiseStream::uniform_box(const Eigen::Ref<const Vector>& support) {
  Vector out(support.size());
  for (Eigen::Index i = 0; i < support.size(); ++i) {
    out(i) = support(i) * (2.0 * next_unit() - 1.0);
  }
  return out;
}

std::uint64_t derive_trial_seed(std::uint64_t base_seed,
                                std::uint64_t trial_id) {
  return philox4x64_10({trial_id, 0, 0, 0}, {base_seed, kTrialSeedDomain})[0];
}

}  // namespace dynwm
