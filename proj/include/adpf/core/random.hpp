#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace adpf {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Derives a stream id from a label and an index ("filter-rep", 17).
/// Equal inputs give equal ids on every platform.
constexpr std::uint64_t stream_id(std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return detail::splitmix64(h ^ detail::splitmix64(index));
}

/// A reproducible source of variates identified by (seed, stream id).
///
/// Identical (seed, stream) pairs yield identical sequences. Distinct stream
/// ids are seeded through a full seed_seq mix, so per-particle or
/// per-replication streams can be handed to independent workers.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double normal() { return normal_(engine_); }

  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Child stream keyed on this stream's identity and `id`.
  RandomStream substream(std::uint64_t id) const {
    return RandomStream(seed_, detail::splitmix64(stream_ ^ detail::splitmix64(id + 1)));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace adpf
