#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace staghunt {

/// Named random streams, so any single source of randomness in an experiment
/// can be frozen or replayed independently of the others.
enum class Stream : std::uint64_t {
  kSpawn = 1,
  kStagMove = 2,
  kPolicyInit = 3,
  kSampling = 4,
  kEgta = 5,
  kShuffle = 6,
};

/// Seeded random stream. Wraps std::mt19937_64 (whose output sequence is
/// fully specified by the standard) and implements its own distribution
/// transforms, so identical seeds give bit-identical draws on every
/// platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  int uniform_int(int n);

  /// Index drawn from an explicit discrete distribution. `probs` need not be
  /// normalised exactly; the last index absorbs rounding slack.
  int categorical(std::span<const double> probs);

  /// In-place Fisher-Yates shuffle driven by this stream.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
      std::swap(items[i], items[uniform_int(i + 1)]);
    }
  }

  /// Derives an independent child stream from the construction seed and a
  /// stream id. Forking does not consume draws from the parent.
  Rng fork(Stream stream) const { return fork(static_cast<std::uint64_t>(stream)); }
  Rng fork(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace staghunt
