#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "pnn/errors.hpp"
#include "pnn/linalg.hpp"

namespace pnn {

/// Seeded counter-based generator (splitmix64 core) with Box-Muller normals.
/// The sample stream depends only on the seed, so runs are reproducible across
/// platforms. Substreams come from split(), which hashes the parent seed with
/// the stream index; substreams never share state with the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(hash(seed)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw via Box-Muller; one spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Independent reproducible substream for the given index.
  Rng split(std::uint64_t stream) const {
    return Rng(hash(seed_ ^ hash(stream + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t hash(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Vector sample_standard_normal(Rng& rng, std::size_t n) {
  if (n < 1) throw DomainError("sample_standard_normal: n must be >= 1");
  Vector v(n);
  for (auto& e : v) e = rng.normal();
  return v;
}

}  // namespace pnn
