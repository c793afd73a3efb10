#pragma once

#include <Eigen/Dense>

namespace fpdtrack {

/// Hidden state per block: amplitude, amplitude increment per block,
/// accumulated phase (unwrapped), frequency offset from the window
/// center f0, and frequency increment per block.
using State5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

namespace st {
inline constexpr int a = 0;
inline constexpr int da = 1;
inline constexpr int phi = 2;
inline constexpr int df = 3;
inline constexpr int ddf = 4;
}  // namespace st

}  // namespace fpdtrack
