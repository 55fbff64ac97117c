#ifndef BORNRATE_PHILOX_H_
#define BORNRATE_PHILOX_H_

#include <array>
#include <cstdint>
#include <string_view>

namespace bornrate {

// Philox4x64-10 (Salmon et al., Random123). A counter-based generator: each
// 256-bit counter maps to an independent 256-bit output block under a
// 128-bit key, so any draw can be regenerated from its index alone.
//
// Stream layout used throughout this project:
//   key     = {seed, 0}
//   counter = {draw index, stream id, 0, 0}
//   uniform = (block[0] >> 12 + 0.5) * 2^-52, strictly inside (0, 1)
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static constexpr std::string_view kAlgorithmId = "philox4x64-10";

  static constexpr Block Generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = Round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  static constexpr Block Round(const Block& c, const Key& k) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * c[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
    const auto lo0 = static_cast<std::uint64_t>(p0);
    const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
    const auto lo1 = static_cast<std::uint64_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

enum class Substream : std::uint64_t {
  kPosition = 0,
  kThinning = 1,
  kReplicaSeed = 2,
};

inline std::uint64_t DrawBits(std::uint64_t seed, Substream stream,
                              std::uint64_t index) {
  return Philox4x64::Generate({index, static_cast<std::uint64_t>(stream), 0, 0},
                              {seed, 0})[0];
}

inline double BitsToUnitOpen(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Uniform on (0, 1) for draw `index` of `stream`.
inline double DrawUniform(std::uint64_t seed, Substream stream,
                          std::uint64_t index) {
  return BitsToUnitOpen(DrawBits(seed, stream, index));
}

// Seed of replica `replica` under `base_seed`; shared by every (M, e) cell.
inline std::uint64_t DeriveReplicaSeed(std::uint64_t base_seed,
                                       std::uint64_t replica) {
  return DrawBits(base_seed, Substream::kReplicaSeed, replica);
}

}  // namespace bornrate

#endif  // BORNRATE_PHILOX_H_
