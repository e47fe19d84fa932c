#include "pnpsgs/fft.hpp"

#include <cmath>
#include <numbers>

#include "pnpsgs/errors.hpp"

namespace pnpsgs::fft {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey, n a power of two.
void fft_pow2(std::vector<cplx>& v, bool invert) {
    const std::size_t n = v.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (invert ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = v[i + k];
                const cplx t = v[i + k + len / 2] * w;
                v[i + k] = u + t;
                v[i + k + len / 2] = u - t;
                w *= wlen;
            }
        }
    }
    if (invert) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& x : v) x *= inv_n;
    }
}

// Bluestein chirp-z transform for arbitrary n, forward direction only;
// inverse is handled by the conjugation trick in inverse().
void fft_bluestein(std::vector<cplx>& v) {
    const std::size_t n = v.size();
    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cplx> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the phase argument small for large transforms
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cplx(std::cos(ang), std::sin(ang));
    }
    std::vector<cplx> a(m, cplx(0.0, 0.0)), b(m, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = v[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
    fft_pow2(a, false);
    fft_pow2(b, false);
    for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
    fft_pow2(a, true);
    for (std::size_t k = 0; k < n; ++k) v[k] = a[k] * chirp[k];
}

}  // namespace

void forward(std::vector<cplx>& v) {
    if (v.empty()) throw ParameterError("fft: empty input");
    if (v.size() == 1) return;
    if (is_pow2(v.size()))
        fft_pow2(v, false);
    else
        fft_bluestein(v);
}

void inverse(std::vector<cplx>& v) {
    if (v.empty()) throw ParameterError("fft: empty input");
    if (v.size() == 1) return;
    if (is_pow2(v.size())) {
        fft_pow2(v, true);
        return;
    }
    for (auto& x : v) x = std::conj(x);
    fft_bluestein(v);
    const double inv_n = 1.0 / static_cast<double>(v.size());
    for (auto& x : v) x = std::conj(x) * inv_n;
}

void forward_2d(std::vector<cplx>& plane, int h, int w) {
    if (static_cast<std::size_t>(h) * w != plane.size())
        throw ShapeError("fft: plane size does not match h*w");
    std::vector<cplx> row(static_cast<std::size_t>(w));
    for (int i = 0; i < h; ++i) {
        std::copy_n(plane.begin() + static_cast<std::size_t>(i) * w, w, row.begin());
        forward(row);
        std::copy_n(row.begin(), w, plane.begin() + static_cast<std::size_t>(i) * w);
    }
    std::vector<cplx> col(static_cast<std::size_t>(h));
    for (int j = 0; j < w; ++j) {
        for (int i = 0; i < h; ++i) col[i] = plane[static_cast<std::size_t>(i) * w + j];
        forward(col);
        for (int i = 0; i < h; ++i) plane[static_cast<std::size_t>(i) * w + j] = col[i];
    }
}

void inverse_2d(std::vector<cplx>& plane, int h, int w) {
    if (static_cast<std::size_t>(h) * w != plane.size())
        throw ShapeError("fft: plane size does not match h*w");
    std::vector<cplx> row(static_cast<std::size_t>(w));
    for (int i = 0; i < h; ++i) {
        std::copy_n(plane.begin() + static_cast<std::size_t>(i) * w, w, row.begin());
        inverse(row);
        std::copy_n(row.begin(), w, plane.begin() + static_cast<std::size_t>(i) * w);
    }
    std::vector<cplx> col(static_cast<std::size_t>(h));
    for (int j = 0; j < w; ++j) {
        for (int i = 0; i < h; ++i) col[i] = plane[static_cast<std::size_t>(i) * w + j];
        inverse(col);
        for (int i = 0; i < h; ++i) plane[static_cast<std::size_t>(i) * w + j] = col[i];
    }
}

std::vector<cplx> forward_2d_real(std::span<const double> plane, int h, int w) {
    std::vector<cplx> out(plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) out[i] = cplx(plane[i], 0.0);
    forward_2d(out, h, w);
    return out;
}

void inverse_2d_to_real(std::vector<cplx> freq, int h, int w, std::span<double> out) {
    inverse_2d(freq, h, w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = freq[i].real();
}

}  // namespace pnpsgs::fft
