#pragma once

#include <cstdint>
#include <random>

#include "zksip/errors.hpp"

namespace zksip {

// splitmix64 finalizer; used for all seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based derivation: child seed = mix(mix(parent) ^ mix(stream + 1)).
// Trial t of a sweep with seed s runs on derive_seed(s, t); inside a session
// the prover, verifier and simulator use derive_seed(session, role).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return mix64(mix64(parent) ^ mix64(stream + 1));
}

namespace role {
inline constexpr std::uint64_t prover = 1;
inline constexpr std::uint64_t verifier = 2;
inline constexpr std::uint64_t simulator = 3;
inline constexpr std::uint64_t input = 4;
inline constexpr std::uint64_t shared = 5;
}  // namespace role

// Sequential generator owned by one party.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  std::uint64_t next() {
    ++draws_;
    return engine_();
  }

  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw EmptySupport("below(0)");
    ++draws_;
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  double unit() {
    ++draws_;
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  bool coin() { return below(2) == 1; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

// Random string with query access: word(i) is a fixed function of (key, i),
// so any position can be re-read. Stands in for the prover's tape t.
class RandomString {
 public:
  explicit RandomString(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }

  std::uint64_t word(std::uint64_t index) const {
    return mix64(key_ ^ mix64(index * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
  }

  // Multiply-shift reduction; bias is below n / 2^64.
  std::uint64_t below(std::uint64_t index, std::uint64_t n) const {
    if (n == 0) throw EmptySupport("below(0)");
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word(index)) * n) >> 64);
  }

 private:
  std::uint64_t key_;
};

}  // namespace zksip
