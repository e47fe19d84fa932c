#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "pnpsgs/errors.hpp"
#include "pnpsgs/fft.hpp"
#include "pnpsgs/sgs.hpp"

namespace pnpsgs {

namespace {

constexpr double kCgTolerance = 1e-10;
constexpr double kSpectralFloor = 1e-12;

std::vector<bool> observed_flags(const MaskOperator& mask) {
    std::vector<bool> obs(static_cast<std::size_t>(mask.height()) * mask.width(), false);
    for (auto idx : mask.kept_indices()) obs[static_cast<std::size_t>(idx)] = true;
    return obs;
}

}  // namespace

std::vector<double> conjugate_gradient(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply_matrix,
    const std::vector<double>& rhs, double tol, int max_iter) {
    const std::size_t n = rhs.size();
    std::vector<double> x(n, 0.0);
    std::vector<double> r = rhs;
    std::vector<double> p = rhs;
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    double rs = dot(r, r);
    const double threshold = tol * tol * rs;
    if (rs == 0.0) return x;
    for (int it = 0; it < max_iter; ++it) {
        const std::vector<double> ap = apply_matrix(p);
        const double alpha = rs / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rs_new = dot(r, r);
        if (rs_new <= threshold) return x;
        const double beta = rs_new / rs;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        rs = rs_new;
    }
    throw SamplerError("conjugate gradient did not reach tolerance " + std::to_string(tol) +
                       " within " + std::to_string(max_iter) + " iterations");
}

Image sample_x_deblur(const Image& y, const Image& z, const CirculantOperator& op,
                      const NoiseModel& noise, double rho, Rng& rng) {
    require_same_shape(y, z, "sample_x_deblur");
    if (y.height() != op.height() || y.width() != op.width())
        throw ShapeError("sample_x_deblur: operator grid mismatch");
    if (!(rho > 0.0)) throw ParameterError("sample_x_deblur: rho must be > 0");

    const int h = y.height(), w = y.width();
    const double inv_rho2 = 1.0 / (rho * rho);
    Image x(h, w, y.channels());

    if (noise.kind == NoiseModel::Kind::scalar) {
        if (!(noise.sigma > 0.0)) throw ParameterError("sample_x_deblur: sigma must be > 0");
        const double inv_sig2 = 1.0 / (noise.sigma * noise.sigma);
        const auto& spec = op.spectrum();
        std::vector<double> white(static_cast<std::size_t>(h) * w);
        for (int c = 0; c < y.channels(); ++c) {
            auto yf = fft::forward_2d_real(y.channel(c), h, w);
            auto zf = fft::forward_2d_real(z.channel(c), h, w);
            rng.fill_normal(white);
            auto wf = fft::forward_2d_real(white, h, w);
            for (std::size_t k = 0; k < yf.size(); ++k) {
                const double q = std::norm(spec[k]) * inv_sig2 + inv_rho2;
                const fft::cplx mu = (std::conj(spec[k]) * yf[k] * inv_sig2 + zf[k] * inv_rho2) / q;
                yf[k] = mu + wf[k] / std::sqrt(q);
            }
            fft::inverse_2d_to_real(std::move(yf), h, w, x.channel(c));
        }
        return x;
    }

    // Spatially-variant noise: exact perturbation-optimization. Perturb the
    // data and the prior mean, then solve Q x = H^T Omega y~ + z~/rho^2.
    if (noise.diag_variances.size() != y.plane_size())
        throw ShapeError("sample_x_deblur: variance map does not match image");
    const auto& var = noise.diag_variances;
    const std::size_t n = y.plane_size();
    for (int c = 0; c < y.channels(); ++c) {
        Image y_pert(h, w, 1), z_pert(h, w, 1);
        auto yc = y.channel(c);
        auto zc = z.channel(c);
        for (std::size_t i = 0; i < n; ++i) {
            y_pert.data()[i] = yc[i] + std::sqrt(var[i]) * rng.normal();
            z_pert.data()[i] = zc[i] + rho * rng.normal();
        }
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = z_pert.data()[i] * inv_rho2;
        // H^T Omega y~: scale before the adjoint since Omega acts in data space
        for (std::size_t i = 0; i < n; ++i) y_pert.data()[i] /= var[i];
        const Image hty = op.adjoint(y_pert);
        for (std::size_t i = 0; i < n; ++i) rhs[i] += hty.data()[i];

        auto apply_q = [&](const std::vector<double>& v) {
            Image tmp(h, w, 1);
            tmp.data() = v;
            Image hv = op.apply(tmp);
            for (std::size_t i = 0; i < n; ++i) hv.data()[i] /= var[i];
            Image qv = op.adjoint(hv);
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) out[i] = qv.data()[i] + v[i] * inv_rho2;
            return out;
        };
        const auto solution =
            conjugate_gradient(apply_q, rhs, kCgTolerance, 10 * static_cast<int>(n));
        std::copy(solution.begin(), solution.end(), x.channel(c).begin());
    }
    return x;
}

Image sample_x_inpaint(const Image& y, const Image& z, const MaskOperator& mask, double sigma,
                       double rho, Rng& rng) {
    if (!(sigma > 0.0) || !(rho > 0.0))
        throw ParameterError("sample_x_inpaint: sigma and rho must be > 0");
    if (y.width() != static_cast<int>(mask.kept_count()) || y.height() != 1)
        throw ShapeError("sample_x_inpaint: measurement length mismatch");
    if (z.height() != mask.height() || z.width() != mask.width() || z.channels() != y.channels())
        throw ShapeError("sample_x_inpaint: state shape mismatch");

    const double s2 = sigma * sigma, r2 = rho * rho;
    const double obs_var = s2 * r2 / (s2 + r2);
    const double obs_sd = std::sqrt(obs_var);
    const double unobs_sd = rho;

    Image x = z;
    for (int c = 0; c < z.channels(); ++c) {
        auto xc = x.channel(c);
        for (double& v : xc) v += unobs_sd * rng.normal();
        // Observed pixels overwrite the prior-only draw with the conjugate
        // combination of y and z; unobserved pixels keep mean z, variance rho^2.
        auto yc = y.channel(c);
        auto zc = z.channel(c);
        const auto& kept = mask.kept_indices();
        for (std::size_t m = 0; m < kept.size(); ++m) {
            const auto i = static_cast<std::size_t>(kept[m]);
            xc[i] = (r2 * yc[m] + s2 * zc[i]) / (s2 + r2) + obs_sd * rng.normal();
        }
    }
    return x;
}

Image sample_sr_z1(const Image& y, const Image& x, const MaskOperator& mask,
                   const CirculantOperator& blur, double sigma, double rho1, Rng& rng) {
    if (!(sigma > 0.0) || !(rho1 > 0.0))
        throw ParameterError("sample_sr_z1: sigma and rho1 must be > 0");
    if (y.height() != 1 || y.width() != static_cast<int>(mask.kept_count()))
        throw ShapeError("sample_sr_z1: measurement length mismatch");
    const Image bx = blur.apply(x);
    if (bx.channels() != y.channels()) throw ShapeError("sample_sr_z1: channel mismatch");

    const double s2 = sigma * sigma, r2 = rho1 * rho1;
    const double kept_var = s2 * r2 / (s2 + r2);
    const double kept_sd = std::sqrt(kept_var);

    Image z1 = bx;
    for (int c = 0; c < z1.channels(); ++c) {
        auto zc = z1.channel(c);
        for (double& v : zc) v += rho1 * rng.normal();
        auto yc = y.channel(c);
        auto bc = bx.channel(c);
        const auto& kept = mask.kept_indices();
        for (std::size_t m = 0; m < kept.size(); ++m) {
            const auto i = static_cast<std::size_t>(kept[m]);
            zc[i] = (r2 * yc[m] + s2 * bc[i]) / (s2 + r2) + kept_sd * rng.normal();
        }
    }
    return z1;
}

Image sample_sr_x(const Image& z1, const CirculantOperator& blur, double rho1, Rng& rng,
                  double ridge) {
    if (!(rho1 > 0.0)) throw ParameterError("sample_sr_x: rho1 must be > 0");
    if (ridge < 0.0) throw ParameterError("sample_sr_x: ridge must be >= 0");
    if (z1.height() != blur.height() || z1.width() != blur.width())
        throw ShapeError("sample_sr_x: operator grid mismatch");

    const int h = z1.height(), w = z1.width();
    const double inv_r2 = 1.0 / (rho1 * rho1);
    const auto& spec = blur.spectrum();
    for (std::size_t k = 0; k < spec.size(); ++k) {
        if (std::norm(spec[k]) * inv_r2 + ridge < kSpectralFloor)
            throw SamplerError(
                "sample_sr_x: singular blur spectrum (|b_k|^2/rho1^2 + ridge below " +
                std::to_string(kSpectralFloor) + "); increase the ridge");
    }

    Image x(h, w, z1.channels());
    std::vector<double> white(static_cast<std::size_t>(h) * w);
    for (int c = 0; c < z1.channels(); ++c) {
        auto zf = fft::forward_2d_real(z1.channel(c), h, w);
        rng.fill_normal(white);
        auto wf = fft::forward_2d_real(white, h, w);
        for (std::size_t k = 0; k < zf.size(); ++k) {
            const double p = std::norm(spec[k]) * inv_r2 + ridge;
            const fft::cplx mu = std::conj(spec[k]) * zf[k] * inv_r2 / p;
            zf[k] = mu + wf[k] / std::sqrt(p);
        }
        fft::inverse_2d_to_real(std::move(zf), h, w, x.channel(c));
    }
    return x;
}

Image initial_state(const TaskSpec& task) {
    if (std::holds_alternative<DeblurTask>(task.variant)) return task.y;
    if (const auto* inpaint = std::get_if<InpaintTask>(&task.variant)) {
        Image z0 = inpaint->mask.adjoint(task.y);
        const auto obs = observed_flags(inpaint->mask);
        for (int c = 0; c < z0.channels(); ++c) {
            auto yc = task.y.channel(c);
            double mean = 0.0;
            for (double v : yc) mean += v;
            mean /= static_cast<double>(yc.size());
            auto zc = z0.channel(c);
            for (std::size_t i = 0; i < zc.size(); ++i)
                if (!obs[i]) zc[i] = mean;
        }
        return z0;
    }
    const auto& sr = std::get<SuperResTask>(task.variant);
    return sr.blur.adjoint(sr.mask.adjoint(task.y));
}

}  // namespace pnpsgs
