#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace gfamp::rng {

// splitmix64 finalizer. Used both as a bit mixer for seed derivation and as
// the documented stable hash behind per-trial substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable seed derivation: chain the finalizer over (master, path...).
// Identical inputs give identical seeds on every platform and build.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::span<const std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t v : path) h = mix64(h ^ mix64(v));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return derive_seed(master, std::span<const std::uint64_t>(path.begin(), path.size()));
}

// Substream purposes, hashed into the seed path so that e.g. adding antennas
// never shifts the pilot realization.
enum class Purpose : std::uint64_t {
  pilots = 1,
  activities = 2,
  distances = 3,
  channels = 4,
  noise = 5,
  se_mc = 6,
  tuples = 7,
};

// Deterministic sample stream. mt19937_64 has a fully specified integer
// sequence; gaussians use an explicit Box-Muller so the double stream is
// byte-stable too (std::normal_distribution is implementation-defined).
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // (0, 1]; safe as a log() argument
  double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  // N(0, 1)
  double normal() {
    double u = uniform_pos();
    double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  // CN(0, 1): E|x|^2 = 1, i.e. N(0, 1/2) per component
  std::complex<double> cnormal() {
    double u = uniform_pos();
    double v = uniform();
    double r = std::sqrt(-std::log(u));
    return {r * std::cos(2.0 * std::numbers::pi * v), r * std::sin(2.0 * std::numbers::pi * v)};
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace gfamp::rng
