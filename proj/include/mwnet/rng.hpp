#pragma once

#include <cstdint>

namespace mwnet {

/// Counter-based generator: each output is a SplitMix64 finalization of
/// (key, counter). Independent streams are derived with split(), so data
/// generation, noise injection and batch sampling never share a sequence.
///
/// Normal and integer draws are implemented here rather than through
/// <random> distributions so results are identical across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  Rng split(std::uint64_t stream) const { return Rng(key_, stream); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  bool operator==(const Rng&) const = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream identifiers used by the library.
namespace streams {
inline constexpr std::uint64_t kFeatures = 1;
inline constexpr std::uint64_t kLongtail = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kMetaSplit = 4;
inline constexpr std::uint64_t kClassifierInit = 5;
inline constexpr std::uint64_t kWeightNetInit = 6;
inline constexpr std::uint64_t kTrainBatches = 7;
inline constexpr std::uint64_t kMetaBatches = 8;
inline constexpr std::uint64_t kTracking = 9;
inline constexpr std::uint64_t kTestSet = 10;
inline constexpr std::uint64_t kFlipTargets = 11;
inline constexpr std::uint64_t kGradcheck = 12;
}  // namespace streams

}  // namespace mwnet
