#include "pnpsgs/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pnpsgs/errors.hpp"

namespace pnpsgs {

namespace {
constexpr int kWindow = 7;

// Sliding-window sums via a summed-area table, one channel.
std::vector<double> box_sums(std::span<const double> p, int h, int w) {
    std::vector<double> sat(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            sat[(i + 1) * static_cast<std::size_t>(w + 1) + (j + 1)] =
                p[static_cast<std::size_t>(i) * w + j] +
                sat[i * static_cast<std::size_t>(w + 1) + (j + 1)] +
                sat[(i + 1) * static_cast<std::size_t>(w + 1) + j] -
                sat[i * static_cast<std::size_t>(w + 1) + j];
    const int oh = h - kWindow + 1, ow = w - kWindow + 1;
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j)
            out[static_cast<std::size_t>(i) * ow + j] =
                sat[(i + kWindow) * static_cast<std::size_t>(w + 1) + (j + kWindow)] -
                sat[i * static_cast<std::size_t>(w + 1) + (j + kWindow)] -
                sat[(i + kWindow) * static_cast<std::size_t>(w + 1) + j] +
                sat[i * static_cast<std::size_t>(w + 1) + j];
    return out;
}
}  // namespace

double psnr(const Image& ref, const Image& test, double peak) {
    require_same_shape(ref, test, "psnr");
    if (!(peak > 0.0)) throw ParameterError("psnr: peak must be > 0");
    const Image a = ref.clamped(0.0, peak);
    const Image b = test.clamped(0.0, peak);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& ref, const Image& test, double peak) {
    require_same_shape(ref, test, "ssim");
    if (!(peak > 0.0)) throw ParameterError("ssim: peak must be > 0");
    if (ref.height() < kWindow || ref.width() < kWindow)
        throw ShapeError("ssim: image smaller than the 7x7 window");

    const Image a = ref.clamped(0.0, peak);
    const Image b = test.clamped(0.0, peak);
    const double c1 = 0.01 * peak * 0.01 * peak;
    const double c2 = 0.03 * peak * 0.03 * peak;
    const double n = static_cast<double>(kWindow) * kWindow;

    double channel_sum = 0.0;
    std::vector<double> prod(a.plane_size()), sq_a(a.plane_size()), sq_b(a.plane_size());
    for (int c = 0; c < a.channels(); ++c) {
        auto pa = a.channel(c);
        auto pb = b.channel(c);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            prod[i] = pa[i] * pb[i];
            sq_a[i] = pa[i] * pa[i];
            sq_b[i] = pb[i] * pb[i];
        }
        const auto sum_a = box_sums(pa, a.height(), a.width());
        const auto sum_b = box_sums(pb, a.height(), a.width());
        const auto sum_ab = box_sums(prod, a.height(), a.width());
        const auto sum_aa = box_sums(sq_a, a.height(), a.width());
        const auto sum_bb = box_sums(sq_b, a.height(), a.width());

        double acc = 0.0;
        for (std::size_t k = 0; k < sum_a.size(); ++k) {
            const double mu_a = sum_a[k] / n;
            const double mu_b = sum_b[k] / n;
            const double var_a = sum_aa[k] / n - mu_a * mu_a;
            const double var_b = sum_bb[k] / n - mu_b * mu_b;
            const double cov = sum_ab[k] / n - mu_a * mu_b;
            acc += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                   ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
        channel_sum += acc / static_cast<double>(sum_a.size());
    }
    return channel_sum / static_cast<double>(a.channels());
}

MetricReport evaluate(const Image& ref, const Image& test, double peak) {
    return MetricReport{psnr(ref, test, peak), ssim(ref, test, peak)};
}

}  // namespace pnpsgs
