#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qd {

using Rng = std::mt19937_64;

// Stateless draws on top of the engine. std::normal_distribution caches a
// spare deviate, which breaks bit-exact resume from a serialized engine
// state; these helpers consume a fixed number of engine outputs per call.
inline double uniform_real(Rng& rng) {
  // 53-bit mantissa in [0,1)
  return (rng() >> 11) * 0x1.0p-53;
}

inline double normal(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  double u1 = uniform_real(rng);
  double u2 = uniform_real(rng);
  while (u1 <= 0.0) u1 = uniform_real(rng);
  double z = std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * 3.14159265358979323846 * u2);
  return mean + stddev * z;
}

// Uniform integer in [0, n). Rejection sampling, engine-output exact.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Monotone 64-bit id source for genomes; serialized with checkpoints.
class IdSource {
 public:
  explicit IdSource(std::uint64_t next = 1) : next_(next) {}
  std::uint64_t next() { return next_++; }
  std::uint64_t peek() const { return next_; }
  void set(std::uint64_t v) { next_ = v; }

 private:
  std::uint64_t next_;
};

// FNV-1a, used for topology/config fingerprints.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace qd
