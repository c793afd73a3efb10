#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fpdtrack {

/// splitmix64 step, used to derive independent sub-streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seedable Gaussian source built on std::mt19937_64 with an explicit
/// Box-Muller transform. std::normal_distribution is not pinned by the
/// standard, so using it would break cross-platform reproducibility of
/// seeded simulations; the combination below is bit-stable everywhere.
class GaussianRng {
public:
  explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in (0, 1]; never returns 0 so log() below is safe.
  double uniform01() {
    return 1.0 - static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw.
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fpdtrack
