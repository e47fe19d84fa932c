#include "pnpsgs/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pnpsgs/errors.hpp"
#include "pnpsgs/fft.hpp"

namespace pnpsgs {

ConvolutionKernel gaussian_kernel(int size, double sigma) {
    if (size < 1 || size % 2 == 0) throw ParameterError("gaussian_kernel: size must be odd and positive");
    if (!(sigma > 0.0)) throw ParameterError("gaussian_kernel: sigma must be positive");
    ConvolutionKernel k;
    k.height = k.width = size;
    k.taps.resize(static_cast<std::size_t>(size) * size);
    const int c = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const double d2 = static_cast<double>((i - c) * (i - c) + (j - c) * (j - c));
            const double v = std::exp(-d2 / (2.0 * sigma * sigma));
            k.taps[static_cast<std::size_t>(i) * size + j] = v;
            sum += v;
        }
    }
    for (auto& t : k.taps) t /= sum;
    return k;
}

CirculantOperator::CirculantOperator(const ConvolutionKernel& kernel, int height, int width)
    : height_(height), width_(width) {
    if (kernel.height < 1 || kernel.width < 1 || kernel.height % 2 == 0 || kernel.width % 2 == 0)
        throw ParameterError("circulant: kernel side lengths must be odd and positive");
    if (kernel.height > height || kernel.width > width)
        throw ShapeError("circulant: kernel larger than image");
    for (double t : kernel.taps)
        if (!std::isfinite(t)) throw ParameterError("circulant: non-finite kernel tap");

    // First column of the circulant matrix: tap (i,j) of the kernel acts on
    // offset (i-ci, j-cj), wrapped cyclically onto the image grid.
    std::vector<double> first(static_cast<std::size_t>(height) * width, 0.0);
    const int ci = kernel.height / 2;
    const int cj = kernel.width / 2;
    for (int i = 0; i < kernel.height; ++i) {
        for (int j = 0; j < kernel.width; ++j) {
            const int r = ((i - ci) % height + height) % height;
            const int c = ((j - cj) % width + width) % width;
            first[static_cast<std::size_t>(r) * width + c] += kernel.at(i, j);
        }
    }
    spectrum_ = fft::forward_2d_real(first, height, width);
}

Image CirculantOperator::apply(const Image& x) const {
    if (x.height() != height_ || x.width() != width_)
        throw ShapeError("circulant apply: image is " + std::to_string(x.height()) + "x" +
                         std::to_string(x.width()) + ", operator expects " +
                         std::to_string(height_) + "x" + std::to_string(width_));
    Image out(height_, width_, x.channels());
    for (int c = 0; c < x.channels(); ++c) {
        auto freq = fft::forward_2d_real(x.channel(c), height_, width_);
        for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= spectrum_[k];
        fft::inverse_2d_to_real(std::move(freq), height_, width_, out.channel(c));
    }
    return out;
}

Image CirculantOperator::adjoint(const Image& v) const {
    if (v.height() != height_ || v.width() != width_)
        throw ShapeError("circulant adjoint: shape mismatch");
    Image out(height_, width_, v.channels());
    for (int c = 0; c < v.channels(); ++c) {
        auto freq = fft::forward_2d_real(v.channel(c), height_, width_);
        for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= std::conj(spectrum_[k]);
        fft::inverse_2d_to_real(std::move(freq), height_, width_, out.channel(c));
    }
    return out;
}

MaskOperator::MaskOperator(std::vector<std::int64_t> kept_indices, int height, int width)
    : kept_(std::move(kept_indices)), height_(height), width_(width) {
    const std::int64_t total = static_cast<std::int64_t>(height) * width;
    std::int64_t prev = -1;
    for (std::int64_t idx : kept_) {
        if (idx <= prev) throw ParameterError("mask: kept indices must be strictly increasing");
        if (idx < 0 || idx >= total) throw ParameterError("mask: kept index out of range");
        prev = idx;
    }
}

Image MaskOperator::apply(const Image& x) const {
    if (x.height() != height_ || x.width() != width_)
        throw ShapeError("mask apply: shape mismatch");
    Image out(1, static_cast<int>(kept_.size()), x.channels());
    for (int c = 0; c < x.channels(); ++c) {
        auto src = x.channel(c);
        auto dst = out.channel(c);
        for (std::size_t m = 0; m < kept_.size(); ++m) dst[m] = src[kept_[m]];
    }
    return out;
}

Image MaskOperator::adjoint(const Image& v) const {
    if (v.height() != 1 || v.width() != static_cast<int>(kept_.size()))
        throw ShapeError("mask adjoint: measurement length mismatch");
    Image out(height_, width_, v.channels());
    for (int c = 0; c < v.channels(); ++c) {
        auto src = v.channel(c);
        auto dst = out.channel(c);
        for (std::size_t m = 0; m < kept_.size(); ++m) dst[kept_[m]] = src[m];
    }
    return out;
}

ComposedOperator::ComposedOperator(MaskOperator mask, CirculantOperator blur)
    : mask_(std::move(mask)), blur_(std::move(blur)) {
    if (mask_.height() != blur_.height() || mask_.width() != blur_.width())
        throw ShapeError("composed operator: mask and blur grids differ");
}

Image apply(const LinearOperator& op, const Image& x) {
    return std::visit([&](const auto& o) { return o.apply(x); }, op);
}

Image adjoint(const LinearOperator& op, const Image& v) {
    return std::visit([&](const auto& o) { return o.adjoint(v); }, op);
}

NoiseModel NoiseModel::scalar(double sigma) {
    if (sigma < 0.0) throw ParameterError("noise: sigma must be >= 0");
    NoiseModel n;
    n.kind = Kind::scalar;
    n.sigma = sigma;
    return n;
}

NoiseModel NoiseModel::diagonal(std::vector<double> variances) {
    for (double v : variances)
        if (!(v > 0.0)) throw ParameterError("noise: diagonal variances must be strictly positive");
    NoiseModel n;
    n.kind = Kind::diagonal;
    n.diag_variances = std::move(variances);
    return n;
}

Image degrade(const Image& x, const LinearOperator& op, const NoiseModel& noise, Rng& rng) {
    Image y = apply(op, x);
    if (noise.kind == NoiseModel::Kind::scalar) {
        if (noise.sigma == 0.0) return y;
        for (double& v : y.data()) v += noise.sigma * rng.normal();
    } else {
        if (noise.diag_variances.size() != y.plane_size())
            throw ShapeError("degrade: diagonal noise length does not match measurement");
        for (int c = 0; c < y.channels(); ++c) {
            auto ch = y.channel(c);
            for (std::size_t i = 0; i < ch.size(); ++i)
                ch[i] += std::sqrt(noise.diag_variances[i]) * rng.normal();
        }
    }
    require_finite(y, "degrade");
    return y;
}

MaskOperator random_mask(int height, int width, double masked_fraction, Rng& rng) {
    if (masked_fraction < 0.0 || masked_fraction >= 1.0)
        throw ParameterError("random_mask: masked_fraction must be in [0, 1)");
    const std::int64_t total = static_cast<std::int64_t>(height) * width;
    const std::int64_t masked = std::llround(masked_fraction * static_cast<double>(total));
    const std::int64_t kept = total - masked;
    if (kept < 1) throw ParameterError("random_mask: mask would keep no pixel");

    // Partial Fisher-Yates: the first `kept` entries are a uniform sample
    // without replacement.
    std::vector<std::int64_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::int64_t i = 0; i < kept; ++i) {
        const std::int64_t j = i + static_cast<std::int64_t>(rng.below(total - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::int64_t> kept_idx(idx.begin(), idx.begin() + kept);
    std::sort(kept_idx.begin(), kept_idx.end());
    return MaskOperator(std::move(kept_idx), height, width);
}

MaskOperator stride_mask(int height, int width, int factor) {
    if (factor < 1) throw ParameterError("stride_mask: factor must be >= 1");
    std::vector<std::int64_t> kept;
    for (int i = 0; i < height; i += factor)
        for (int j = 0; j < width; j += factor)
            kept.push_back(static_cast<std::int64_t>(i) * width + j);
    return MaskOperator(std::move(kept), height, width);
}

}  // namespace pnpsgs
