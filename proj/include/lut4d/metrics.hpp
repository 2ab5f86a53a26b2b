#pragma once

#include "lut4d/image.hpp"

namespace lut4d {

// 10 log10(1 / MSE) for signals in [0,1]. Identical images give +infinity.
double psnr(const Image& a, const Image& b);

// Mean SSIM over all valid 11x11 windows (Gaussian, sigma 1.5, K1 = 0.01,
// K2 = 0.03, dynamic range 1), averaged over the three channels.
// Requires at least 11x11 pixels.
double ssim(const Image& a, const Image& b);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

}  // namespace lut4d
