#pragma once

#include "pnpsgs/image.hpp"

namespace pnpsgs {

struct MetricReport {
    double psnr = 0.0;  // dB; +infinity when the images are identical
    double ssim = 0.0;  // in [-1, 1]
};

/// 10 log10(peak^2 / MSE) over all pixels and channels; inputs are clamped to
/// [0, peak] first. Identical images give +infinity.
double psnr(const Image& ref, const Image& test, double peak = 1.0);

/// Mean local SSIM with a 7x7 uniform window (valid positions only),
/// population statistics, C1 = (0.01 peak)^2, C2 = (0.03 peak)^2, computed per
/// channel and averaged. Inputs are clamped to [0, peak] first.
double ssim(const Image& ref, const Image& test, double peak = 1.0);

MetricReport evaluate(const Image& ref, const Image& test, double peak = 1.0);

}  // namespace pnpsgs
