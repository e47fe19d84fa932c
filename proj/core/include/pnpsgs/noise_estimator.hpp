#pragma once

#include <span>
#include <vector>

#include "pnpsgs/image.hpp"

namespace pnpsgs {

struct NoiseEstimate {
    double sigma = 0.0;               // channel-averaged estimate
    std::vector<double> per_channel;  // one entry per channel
};

/// Blind estimate of the Gaussian noise standard deviation: per channel, the
/// median absolute value of the finest-scale diagonal wavelet detail
/// coefficients divided by 0.67449 (the normal upper quartile), then averaged
/// across channels.
///
/// Daubechies 8-tap filters by default; Haar on images too small for them.
/// Odd side lengths are edge-padded to even before the transform.
NoiseEstimate estimate_sigma(const Image& x);

/// Diagonal (HH) detail coefficients of a single-level periodized 2-D DWT of
/// one channel (exposed for tests).
std::vector<double> diagonal_detail(std::span<const double> plane, int height, int width);

}  // namespace pnpsgs
