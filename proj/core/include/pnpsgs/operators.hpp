#pragma once

#include <complex>
#include <cstdint>
#include <variant>
#include <vector>

#include "pnpsgs/image.hpp"
#include "pnpsgs/rng.hpp"

namespace pnpsgs {

/// 2-D convolution kernel with odd side lengths, anchored at its center tap.
struct ConvolutionKernel {
    int height = 0;
    int width = 0;
    std::vector<double> taps;  // row-major, height*width

    double at(int i, int j) const { return taps[static_cast<std::size_t>(i) * width + j]; }
};

/// Truncated Gaussian taps on a size x size grid, renormalized to sum 1.
ConvolutionKernel gaussian_kernel(int size, double sigma);

/// Cyclic (circulant) convolution operator stored as the 2-D DFT of the
/// zero-padded, center-anchored, cyclically wrapped kernel.
class CirculantOperator {
public:
    CirculantOperator() = default;
    CirculantOperator(const ConvolutionKernel& kernel, int height, int width);

    int height() const { return height_; }
    int width() const { return width_; }
    const std::vector<std::complex<double>>& spectrum() const { return spectrum_; }

    Image apply(const Image& x) const;
    Image adjoint(const Image& v) const;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::complex<double>> spectrum_;
};

/// Binary subsampling operator defined by the kept pixel indices (flat,
/// strictly increasing), applied identically across channels. H H^T = I_M.
class MaskOperator {
public:
    MaskOperator() = default;
    MaskOperator(std::vector<std::int64_t> kept_indices, int height, int width);

    int height() const { return height_; }
    int width() const { return width_; }
    std::int64_t kept_count() const { return static_cast<std::int64_t>(kept_.size()); }
    const std::vector<std::int64_t>& kept_indices() const { return kept_; }

    /// Gather: output shape (C, 1, M).
    Image apply(const Image& x) const;
    /// Scatter into zeros: output shape (C, H, W).
    Image adjoint(const Image& v) const;

private:
    std::vector<std::int64_t> kept_;
    int height_ = 0;
    int width_ = 0;
};

/// Mask after blur: H = S B (super-resolution forward model).
class ComposedOperator {
public:
    ComposedOperator() = default;
    ComposedOperator(MaskOperator mask, CirculantOperator blur);

    const MaskOperator& mask() const { return mask_; }
    const CirculantOperator& blur() const { return blur_; }

    Image apply(const Image& x) const { return mask_.apply(blur_.apply(x)); }
    Image adjoint(const Image& v) const { return blur_.adjoint(mask_.adjoint(v)); }

private:
    MaskOperator mask_;
    CirculantOperator blur_;
};

/// Sum type over the forward models used by the tasks.
using LinearOperator = std::variant<CirculantOperator, MaskOperator, ComposedOperator>;

Image apply(const LinearOperator& op, const Image& x);
Image adjoint(const LinearOperator& op, const Image& v);

/// Gaussian observation noise: scalar sigma or per-element variances
/// (spatially variant, shared across channels).
struct NoiseModel {
    enum class Kind { scalar, diagonal };
    Kind kind = Kind::scalar;
    double sigma = 0.0;                   // scalar case; 0 means noiseless
    std::vector<double> diag_variances;   // diagonal case, one per measurement element

    static NoiseModel scalar(double sigma);
    static NoiseModel diagonal(std::vector<double> variances);
};

/// y = H x + n with n drawn from the noise model; deterministic under a fixed
/// seed.
Image degrade(const Image& x, const LinearOperator& op, const NoiseModel& noise, Rng& rng);

/// Uniform-without-replacement mask keeping (total - round(masked_fraction *
/// total)) pixels; the same spatial mask applies to all channels.
MaskOperator random_mask(int height, int width, double masked_fraction, Rng& rng);

/// Regular-grid mask keeping pixels with row % factor == 0 and col % factor == 0.
MaskOperator stride_mask(int height, int width, int factor);

}  // namespace pnpsgs
