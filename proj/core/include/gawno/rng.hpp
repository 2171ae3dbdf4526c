#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace gawno {

/// Deterministic random source. All randomness in the library flows through
/// this class so that a run is reproducible from a single seed. Independent
/// substreams are derived with stream(), which mixes the stream id into the
/// base seed; the same (seed, id) pair always yields the same sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  /// Derived generator for an independent substream.
  Rng stream(std::uint64_t id) const { return Rng(mix(seed_ + 0x9e3779b97f4a7c15ull * (id + 1))); }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw from [0, 1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  /// Uniform integer from [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  /// Standard normal draw.
  double normal() {
    return std::normal_distribution<double>(0.0, 1.0)(engine_);
  }

  void fill_normal(std::span<double> out, double stddev = 1.0) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& x : out) x = dist(engine_);
  }

  void fill_uniform(std::span<double> out, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& x : out) x = dist(engine_);
  }

 private:
  // splitmix64 finalizer; decorrelates nearby seeds.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace gawno
