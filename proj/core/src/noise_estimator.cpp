#include "pnpsgs/noise_estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pnpsgs/errors.hpp"

namespace pnpsgs {

namespace {

// Daubechies 8-tap orthonormal lowpass filter.
constexpr std::array<double, 8> kDaub8 = {
    0.23037781330885523,  0.7148465705525415,   0.6308807679295904,  -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};

constexpr std::array<double, 2> kHaar = {0.7071067811865476, 0.7071067811865476};

// The normal distribution's upper quartile; MAD / 0.67449 is unbiased for the
// standard deviation of Gaussian data.
constexpr double kMadToSigma = 0.67448975019608171;

// Highpass rows then highpass columns, both periodized and decimated by 2.
template <std::size_t L>
std::vector<double> hh_subband(const std::vector<double>& x, int h, int w,
                               const std::array<double, L>& low) {
    std::array<double, L> high;
    for (std::size_t n = 0; n < L; ++n)
        high[n] = (n % 2 == 0 ? 1.0 : -1.0) * low[L - 1 - n];

    const int hw = w / 2;
    std::vector<double> rows(static_cast<std::size_t>(h) * hw);
    for (int i = 0; i < h; ++i) {
        for (int k = 0; k < hw; ++k) {
            double acc = 0.0;
            for (std::size_t n = 0; n < L; ++n)
                acc += high[n] * x[static_cast<std::size_t>(i) * w + (2 * k + n) % w];
            rows[static_cast<std::size_t>(i) * hw + k] = acc;
        }
    }
    const int hh = h / 2;
    std::vector<double> out(static_cast<std::size_t>(hh) * hw);
    for (int m = 0; m < hh; ++m) {
        for (int k = 0; k < hw; ++k) {
            double acc = 0.0;
            for (std::size_t n = 0; n < L; ++n)
                acc += high[n] * rows[static_cast<std::size_t>((2 * m + n) % h) * hw + k];
            out[static_cast<std::size_t>(m) * hw + k] = acc;
        }
    }
    return out;
}

double median_abs(std::vector<double> v) {
    for (double& x : v) x = std::abs(x);
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (n % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + mid);
        m = 0.5 * (m + lower);
    }
    return m;
}

}  // namespace

std::vector<double> diagonal_detail(std::span<const double> plane, int height, int width) {
    // Edge-replicate odd side lengths to even; this never changes the
    // coefficients of a constant image.
    const int h = height + (height % 2);
    const int w = width + (width % 2);
    std::vector<double> padded(static_cast<std::size_t>(h) * w);
    for (int i = 0; i < h; ++i) {
        const int si = std::min(i, height - 1);
        for (int j = 0; j < w; ++j) {
            const int sj = std::min(j, width - 1);
            padded[static_cast<std::size_t>(i) * w + j] =
                plane[static_cast<std::size_t>(si) * width + sj];
        }
    }
    if (h >= 8 && w >= 8) return hh_subband(padded, h, w, kDaub8);
    return hh_subband(padded, h, w, kHaar);
}

NoiseEstimate estimate_sigma(const Image& x) {
    if (x.height() < 2 || x.width() < 2 || x.channels() < 1)
        throw ParameterError("estimate_sigma: image side lengths must be >= 2");
    NoiseEstimate est;
    est.per_channel.reserve(x.channels());
    for (int c = 0; c < x.channels(); ++c) {
        auto details = diagonal_detail(x.channel(c), x.height(), x.width());
        est.per_channel.push_back(median_abs(std::move(details)) / kMadToSigma);
    }
    double sum = 0.0;
    for (double s : est.per_channel) sum += s;
    est.sigma = sum / static_cast<double>(x.channels());
    return est;
}

}  // namespace pnpsgs
