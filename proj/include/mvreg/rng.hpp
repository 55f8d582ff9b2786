#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace mvreg {

namespace detail {
// SplitMix64 finalizer; full-avalanche 64-bit mixing.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-mode keyed random stream. Every draw is mix(key, counter), so
// streams forked with distinct indices are independent of each other and of
// the parent's draw position. All sampling in the toolkit goes through this
// class; the C++ <random> distributions are implementation-defined and would
// break cross-build reproducibility.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed)
      : key_(detail::mix64(seed ^ 0x243f6a8885a308d3ull)), ctr_(0) {}

  // Derives an independent substream keyed by (this stream's key, index).
  RngStream fork(std::uint64_t index) const {
    RngStream s(raw_key{}, detail::mix64(key_ ^ detail::mix64(index ^ 0x452821e638d01377ull)));
    return s;
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: hi < lo");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::Vector3d normal3() {
    Eigen::Vector3d v;
    v.x() = normal();
    v.y() = normal();
    v.z() = normal();
    return v;
  }

 private:
  struct raw_key {};
  RngStream(raw_key, std::uint64_t key) : key_(key), ctr_(0) {}

  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace mvreg
