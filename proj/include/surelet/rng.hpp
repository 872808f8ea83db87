#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace surelet {

/// Deterministic standard-normal source: std::mt19937_64 (bit-exact across
/// standard libraries) feeding a polar-free Box-Muller transform. Unlike
/// std::normal_distribution, the output sequence is fixed by the seed alone.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double uniform_open() {
    // 53-bit mantissa in (0, 1).
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace surelet
