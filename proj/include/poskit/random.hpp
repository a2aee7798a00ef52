#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace poskit {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// A key component used when deriving substreams: either a number or a tag.
class StreamKey {
 public:
  StreamKey(std::uint64_t value) : value_(value) {}
  StreamKey(int value) : value_(static_cast<std::uint64_t>(static_cast<std::int64_t>(value))) {}
  StreamKey(std::string_view tag) : value_(fnv1a64(tag)) {}
  StreamKey(const char* tag) : value_(fnv1a64(tag)) {}
  StreamKey(const std::string& tag) : value_(fnv1a64(tag)) {}

  std::uint64_t value() const { return value_; }

 private:
  std::uint64_t value_;
};

/// Mixes a root seed with a path of keys. Stable across platforms and runs.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<StreamKey> path);

/// Deterministic random stream. The engine is mt19937_64 (fully specified by
/// the standard); bounded draws use our own rejection sampling because the
/// standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform_real();

  bool bernoulli(double p) { return uniform_real() < p; }

  template <typename T>
  const T& choice(std::span<const T> values) {
    return values[static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(values.size()) - 1))];
  }
  template <typename T>
  const T& choice(const std::vector<T>& values) {
    return choice(std::span<const T>(values));
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Independent child stream; does not advance this stream.
  Rng fork(std::initializer_list<StreamKey> path) const { return Rng(derive_seed(seed_, path)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace poskit
