#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace mfhb {

// Counter-based random streams. Every draw is a pure function of
// (seed, stream tags, counter), so parallel and serial execution agree
// bit-for-bit and any (particle, step) stream can be opened at random.

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t word) {
  return mix64(h ^ (word + 0xA0761D6478BD642FULL) * 0xE7037ED1A0B428DBULL);
}

}  // namespace detail

// Stream identity: seed plus up to three tag words (purpose, entity id, step).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t id = 0,
            std::uint64_t step = 0) {
    std::uint64_t h = detail::mix64(seed);
    h = detail::absorb(h, tag);
    h = detail::absorb(h, id);
    key_ = detail::absorb(h, step);
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + (counter_++) * detail::kGolden); }

  // Uniform on the open interval (0,1); bin centers, never 0 or 1.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Standard normal via Box-Muller; the spare is cached stream-locally.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  void fill_normal(std::span<double> out, double scale = 1.0) {
    for (double& v : out) v = scale * next_normal();
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream purposes. Values are part of the reproducibility contract:
// changing them changes every sampled trajectory.
namespace rng_tag {
inline constexpr std::uint64_t kFeatures = 1;
inline constexpr std::uint64_t kTeacher = 2;
inline constexpr std::uint64_t kInitTheta = 3;
inline constexpr std::uint64_t kInitVelocity = 4;
inline constexpr std::uint64_t kStepNoise = 5;
}  // namespace rng_tag

}  // namespace mfhb
