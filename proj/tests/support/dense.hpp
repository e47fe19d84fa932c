#pragma once

// Small dense linear-algebra helpers for test oracles. Deliberately
// independent of the library's FFT/spectral code paths: plain triple loops
// and Cholesky factorizations only.

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pnpsgs/image.hpp"
#include "pnpsgs/operators.hpp"

namespace oracle {

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline Mat matmul(const Mat& x, const Mat& y) {
    assert(x.cols == y.rows);
    Mat out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) out(i, j) += v * y(k, j);
        }
    return out;
}

inline Mat transpose(const Mat& x) {
    Mat out(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out(j, i) = x(i, j);
    return out;
}

inline std::vector<double> matvec(const Mat& x, const std::vector<double>& v) {
    assert(static_cast<int>(v.size()) == x.cols);
    std::vector<double> out(static_cast<std::size_t>(x.rows), 0.0);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out[i] += x(i, j) * v[j];
    return out;
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
inline Mat cholesky(const Mat& m) {
    assert(m.rows == m.cols);
    const int n = m.rows;
    Mat lower(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("oracle cholesky: matrix not SPD");
                lower(i, j) = std::sqrt(s);
            } else {
                lower(i, j) = s / lower(j, j);
            }
        }
    }
    return lower;
}

inline std::vector<double> chol_solve(const Mat& lower, std::vector<double> b) {
    const int n = lower.rows;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) b[i] -= lower(i, k) * b[k];
        b[i] /= lower(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) b[i] -= lower(k, i) * b[k];
        b[i] /= lower(i, i);
    }
    return b;
}

inline Mat inverse_spd(const Mat& m) {
    const Mat lower = cholesky(m);
    const int n = m.rows;
    Mat inv(n, n);
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        e.assign(static_cast<std::size_t>(n), 0.0);
        e[j] = 1.0;
        const auto col = chol_solve(lower, e);
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    return inv;
}

/// Dense matrix of a linear operator on a single-channel h x w grid, built
/// column by column from unit vectors.
inline Mat dense_from_operator(const pnpsgs::LinearOperator& op, int h, int w) {
    const int n = h * w;
    pnpsgs::Image unit(h, w, 1);
    pnpsgs::Image first = pnpsgs::apply(op, unit);
    const int m = static_cast<int>(first.plane_size());
    Mat out(m, n);
    for (int j = 0; j < n; ++j) {
        unit.data().assign(unit.size(), 0.0);
        unit.data()[static_cast<std::size_t>(j)] = 1.0;
        const pnpsgs::Image col = pnpsgs::apply(op, unit);
        for (int i = 0; i < m; ++i) out(i, j) = col.data()[static_cast<std::size_t>(i)];
    }
    return out;
}

/// Conditional distribution of the first `na` coordinates of N(mu, sigma)
/// given the remaining coordinates equal `obs`. Returns (mean, covariance).
inline std::pair<std::vector<double>, Mat> condition_gaussian(const std::vector<double>& mu,
                                                              const Mat& sigma, int na,
                                                              const std::vector<double>& obs) {
    const int n = sigma.rows;
    const int nb = n - na;
    assert(static_cast<int>(obs.size()) == nb);
    Mat s_bb(nb, nb), s_ab(na, nb), s_aa(na, na);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) s_bb(i, j) = sigma(na + i, na + j);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) s_ab(i, j) = sigma(i, na + j);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j) s_aa(i, j) = sigma(i, j);

    const Mat bb_inv = inverse_spd(s_bb);
    const Mat gain = matmul(s_ab, bb_inv);  // na x nb
    std::vector<double> diff(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i) diff[i] = obs[i] - mu[na + i];
    std::vector<double> mean(static_cast<std::size_t>(na));
    const auto shift = matvec(gain, diff);
    for (int i = 0; i < na; ++i) mean[i] = mu[i] + shift[i];
    const Mat cov_drop = matmul(gain, transpose(s_ab));
    Mat cov(na, na);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j) cov(i, j) = s_aa(i, j) - cov_drop(i, j);
    return {mean, cov};
}

/// Streaming mean/variance accumulator for Monte Carlo moment checks.
struct MomentAccumulator {
    explicit MomentAccumulator(std::size_t dims) : mean(dims, 0.0), m2(dims, 0.0) {}

    void add(const std::vector<double>& x) {
        ++count;
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double d = x[i] - mean[i];
            mean[i] += d / static_cast<double>(count);
            m2[i] += d * (x[i] - mean[i]);
        }
    }

    double variance(std::size_t i) const { return m2[i] / static_cast<double>(count - 1); }

    std::vector<double> mean;
    std::vector<double> m2;
    long count = 0;
};

}  // namespace oracle
