#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pnpsgs {

/// Dense real image tensor, planar channel layout: data[(c*H + i)*W + j].
///
/// Intensities are nominally in [0,1] but are NOT clamped inside the sampler;
/// clamping happens only at PNG export. A mask measurement is housed as an
/// Image of shape (channels, 1, M).
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels, double fill = 0.0);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }

    /// Pixels per channel.
    std::size_t plane_size() const { return static_cast<std::size_t>(height_) * width_; }
    std::size_t size() const { return data_.size(); }

    double& at(int c, int i, int j) {
        return data_[(static_cast<std::size_t>(c) * height_ + i) * width_ + j];
    }
    double at(int c, int i, int j) const {
        return data_[(static_cast<std::size_t>(c) * height_ + i) * width_ + j];
    }

    std::span<double> channel(int c) {
        return {data_.data() + c * plane_size(), plane_size()};
    }
    std::span<const double> channel(int c) const {
        return {data_.data() + c * plane_size(), plane_size()};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Image& other) const {
        return height_ == other.height_ && width_ == other.width_ &&
               channels_ == other.channels_;
    }

    bool all_finite() const;

    /// Copy with every entry clamped to [lo, hi].
    Image clamped(double lo, double hi) const;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Throws ShapeError unless a and b have identical shape.
void require_same_shape(const Image& a, const Image& b, const char* context);

/// Throws SamplerError when any entry is non-finite.
void require_finite(const Image& img, const char* context);

}  // namespace pnpsgs
