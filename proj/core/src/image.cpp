#include "pnpsgs/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnpsgs/errors.hpp"

namespace pnpsgs {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 0)
        throw ShapeError("negative image dimension");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool Image::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Image Image::clamped(double lo, double hi) const {
    Image out = *this;
    for (double& v : out.data_) v = std::clamp(v, lo, hi);
    return out;
}

void require_same_shape(const Image& a, const Image& b, const char* context) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(context) + ": shape mismatch (" +
                         std::to_string(a.channels()) + "x" + std::to_string(a.height()) +
                         "x" + std::to_string(a.width()) + " vs " +
                         std::to_string(b.channels()) + "x" + std::to_string(b.height()) +
                         "x" + std::to_string(b.width()) + ")");
}

void require_finite(const Image& img, const char* context) {
    if (!img.all_finite())
        throw SamplerError(std::string(context) + ": non-finite value in image");
}

}  // namespace pnpsgs
