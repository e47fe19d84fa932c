// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Run with no arguments for all criteria, or pass criterion
// numbers to run a subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dense.hpp"
#include "pnpsgs/commands.hpp"
#include "pnpsgs/denoiser.hpp"
#include "pnpsgs/errors.hpp"
#include "pnpsgs/external_denoiser.hpp"
#include "pnpsgs/metrics.hpp"
#include "pnpsgs/noise_estimator.hpp"
#include "pnpsgs/npy.hpp"
#include "pnpsgs/operators.hpp"
#include "pnpsgs/rng.hpp"
#include "pnpsgs/schedule.hpp"
#include "pnpsgs/sgs.hpp"
#include "test_util.hpp"

using namespace pnpsgs;
using nlohmann::json;

namespace {

struct CheckFailure {
    std::string message;
};

void expect(bool ok, const std::string& message) {
    if (!ok) throw CheckFailure{message};
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: SMW identity
// ---------------------------------------------------------------------------

std::string criterion_1() {
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int h = 2 + static_cast<int>(rng.below(7));
        const int w = 2 + static_cast<int>(rng.below(7));  // N <= 64
        const double sigma = 0.05 + rng.uniform();
        const double rho = 0.05 + rng.uniform();
        const MaskOperator mask = random_mask(h, w, 0.2 + 0.6 * rng.uniform(), rng);

        const int n = h * w;
        const oracle::Mat dense_h = oracle::dense_from_operator(LinearOperator(mask), h, w);
        oracle::Mat q(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int m = 0; m < dense_h.rows; ++m)
                    acc += dense_h(m, i) * dense_h(m, j) / (sigma * sigma);
                q(i, j) = acc + (i == j ? 1.0 / (rho * rho) : 0.0);
            }
        const oracle::Mat q_inv = oracle::inverse_spd(q);

        std::vector<bool> observed(n, false);
        for (auto idx : mask.kept_indices()) observed[static_cast<std::size_t>(idx)] = true;
        const double s2 = sigma * sigma, r2 = rho * rho;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double closed_form =
                    i == j ? (observed[i] ? s2 * r2 / (s2 + r2) : r2) : 0.0;
                worst = std::max(worst, std::abs(q_inv(i, j) - closed_form));
            }
    }
    expect(worst <= 1e-10, "max deviation " + format_double(worst) + " > 1e-10");
    return "200 random (sigma, rho, mask) triples, max |SMW - dense inverse| = " +
           format_double(worst);
}

// ---------------------------------------------------------------------------
// Criterion 2: exact Gaussian x-steps
// ---------------------------------------------------------------------------

struct MomentResult {
    double worst_mean_z = 0.0;
    double worst_var_z = 0.0;
};

template <typename DrawFn>
MomentResult check_moments(const DrawFn& draw, const std::vector<double>& mu,
                           const std::vector<double>& var_diag, int draws, Rng& rng) {
    oracle::MomentAccumulator acc(mu.size());
    for (int d = 0; d < draws; ++d) acc.add(draw(rng));
    MomentResult out;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double se_mean = std::sqrt(var_diag[i] / draws);
        const double se_var = var_diag[i] * std::sqrt(2.0 / (draws - 1));
        out.worst_mean_z = std::max(out.worst_mean_z, std::abs(acc.mean[i] - mu[i]) / se_mean);
        out.worst_var_z =
            std::max(out.worst_var_z, std::abs(acc.variance(i) - var_diag[i]) / se_var);
    }
    return out;
}

oracle::Mat normal_precision(const oracle::Mat& dense_h, const std::vector<double>& noise_var,
                             double rho) {
    const int n = dense_h.cols;
    oracle::Mat q(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int m = 0; m < dense_h.rows; ++m)
                acc += dense_h(m, i) * dense_h(m, j) / noise_var[m];
            q(i, j) = acc + (i == j ? 1.0 / (rho * rho) : 0.0);
        }
    return q;
}

std::string criterion_2() {
    const int h = 8, w = 8, n = h * w;
    const int draws = 20000;
    Rng rng(202);
    double worst_mean = 0.0, worst_var = 0.0;
    const auto fold = [&](const MomentResult& r) {
        worst_mean = std::max(worst_mean, r.worst_mean_z);
        worst_var = std::max(worst_var, r.worst_var_z);
    };

    // Deblur, scalar noise (spectral path).
    {
        ConvolutionKernel k;
        k.height = k.width = 3;
        k.taps.resize(9);
        for (auto& t : k.taps) t = rng.normal();
        const CirculantOperator op(k, h, w);
        const Image y = testutil::random_image(h, w, 1, rng);
        const Image z = testutil::random_image(h, w, 1, rng);
        const double sigma = 0.3, rho = 0.6;
        const oracle::Mat dense_h = oracle::dense_from_operator(LinearOperator(op), h, w);
        const oracle::Mat q =
            normal_precision(dense_h, std::vector<double>(n, sigma * sigma), rho);
        const oracle::Mat q_inv = oracle::inverse_spd(q);
        std::vector<double> rhs(n), mu(n), var(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) acc += dense_h(m, i) * y.data()[m] / (sigma * sigma);
            rhs[i] = acc + z.data()[i] / (rho * rho);
        }
        mu = oracle::matvec(q_inv, rhs);
        for (int i = 0; i < n; ++i) var[i] = q_inv(i, i);
        Rng dr(1);
        fold(check_moments(
            [&](Rng& r) {
                return sample_x_deblur(y, z, op, NoiseModel::scalar(sigma), rho, r).data();
            },
            mu, var, draws, dr));
    }
    // Deblur, spatially-variant noise (E-PO + conjugate gradient path).
    {
        ConvolutionKernel k = gaussian_kernel(3, 0.9);
        const CirculantOperator op(k, h, w);
        const Image y = testutil::random_image(h, w, 1, rng);
        const Image z = testutil::random_image(h, w, 1, rng);
        const double rho = 0.7;
        std::vector<double> noise_var(n);
        for (auto& v : noise_var) v = 0.02 + 0.08 * rng.uniform();
        const oracle::Mat dense_h = oracle::dense_from_operator(LinearOperator(op), h, w);
        const oracle::Mat q = normal_precision(dense_h, noise_var, rho);
        const oracle::Mat q_inv = oracle::inverse_spd(q);
        std::vector<double> rhs(n), mu(n), var(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) acc += dense_h(m, i) * y.data()[m] / noise_var[m];
            rhs[i] = acc + z.data()[i] / (rho * rho);
        }
        mu = oracle::matvec(q_inv, rhs);
        for (int i = 0; i < n; ++i) var[i] = q_inv(i, i);
        Rng dr(2);
        fold(check_moments(
            [&](Rng& r) {
                return sample_x_deblur(y, z, op, NoiseModel::diagonal(noise_var), rho, r).data();
            },
            mu, var, draws, dr));
    }
    // Inpaint.
    {
        const MaskOperator mask = random_mask(h, w, 0.7, rng);
        const double sigma = 0.2, rho = 0.9;
        const Image z = testutil::random_image(h, w, 1, rng);
        Image y(1, static_cast<int>(mask.kept_count()), 1);
        for (double& v : y.data()) v = rng.uniform();
        std::vector<bool> obs(n, false);
        for (auto idx : mask.kept_indices()) obs[static_cast<std::size_t>(idx)] = true;
        std::vector<double> mu(n), var(n);
        const double s2 = sigma * sigma, r2 = rho * rho;
        std::size_t m = 0;
        for (int i = 0; i < n; ++i) {
            if (obs[i]) {
                mu[i] = (r2 * y.data()[m] + s2 * z.data()[i]) / (s2 + r2);
                var[i] = s2 * r2 / (s2 + r2);
                ++m;
            } else {
                mu[i] = z.data()[i];
                var[i] = r2;
            }
        }
        Rng dr(3);
        fold(check_moments(
            [&](Rng& r) { return sample_x_inpaint(y, z, mask, sigma, rho, r).data(); }, mu, var,
            draws, dr));
    }
    // Super-resolution z1.
    {
        const ConvolutionKernel k = gaussian_kernel(3, 0.8);
        const CirculantOperator blur(k, h, w);
        const MaskOperator mask = stride_mask(h, w, 2);
        const Image x = testutil::random_image(h, w, 1, rng);
        const Image bx = blur.apply(x);
        Image y(1, static_cast<int>(mask.kept_count()), 1);
        for (double& v : y.data()) v = rng.uniform();
        const double sigma = 0.25, rho1 = 0.6;
        std::vector<bool> kept(n, false);
        for (auto idx : mask.kept_indices()) kept[static_cast<std::size_t>(idx)] = true;
        std::vector<double> mu(n), var(n);
        const double s2 = sigma * sigma, r2 = rho1 * rho1;
        std::size_t m = 0;
        for (int i = 0; i < n; ++i) {
            if (kept[i]) {
                mu[i] = (r2 * y.data()[m] + s2 * bx.data()[i]) / (s2 + r2);
                var[i] = s2 * r2 / (s2 + r2);
                ++m;
            } else {
                mu[i] = bx.data()[i];
                var[i] = r2;
            }
        }
        Rng dr(4);
        fold(check_moments(
            [&](Rng& r) { return sample_sr_z1(y, x, mask, blur, sigma, rho1, r).data(); }, mu,
            var, draws, dr));
    }
    // Super-resolution x.
    {
        const ConvolutionKernel k = gaussian_kernel(3, 0.8);
        const CirculantOperator blur(k, h, w);
        const Image z1 = testutil::random_image(h, w, 1, rng);
        const double rho1 = 0.5;
        const oracle::Mat dense_b = oracle::dense_from_operator(LinearOperator(blur), h, w);
        oracle::Mat q(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int m = 0; m < n; ++m) acc += dense_b(m, i) * dense_b(m, j);
                q(i, j) = acc / (rho1 * rho1);
            }
        const oracle::Mat q_inv = oracle::inverse_spd(q);
        std::vector<double> rhs(n), mu(n), var(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) acc += dense_b(m, i) * z1.data()[m];
            rhs[i] = acc / (rho1 * rho1);
        }
        mu = oracle::matvec(q_inv, rhs);
        for (int i = 0; i < n; ++i) var[i] = q_inv(i, i);
        Rng dr(5);
        fold(check_moments(
            [&](Rng& r) { return sample_sr_x(z1, blur, rho1, r, 0.0).data(); }, mu, var, draws,
            dr));
    }

    expect(worst_mean <= 4.0, "worst mean z-score " + format_double(worst_mean) + " > 4");
    expect(worst_var <= 4.0, "worst variance z-score " + format_double(worst_var) + " > 4");
    return "four samplers (deblur scalar+variant, inpaint, sr-z1, sr-x), 2e4 draws: worst mean z " +
           format_double(worst_mean) + ", worst var z " + format_double(worst_var);
}

// ---------------------------------------------------------------------------
// Criterion 3 setup shared with criteria 7 and 9
// ---------------------------------------------------------------------------

struct ConjugateToy {
    TaskSpec task;
    Schedule schedule;
    SamplerConfig cfg;
    Image m0;
    double tau2 = 0.25;
    Image truth;
    MaskOperator mask;
};

ConjugateToy make_conjugate_toy(std::uint64_t data_seed, std::uint64_t chain_seed, int n_mc) {
    ConjugateToy toy;
    toy.schedule = build_linear_schedule(1000, 1e-4, 2e-2);
    const int side = 16;
    toy.truth = testutil::synthetic_image(side, side, 1);
    Rng rng(data_seed);
    toy.mask = random_mask(side, side, 0.8, rng);
    const double sigma = 0.05;
    const Image y = degrade(toy.truth, LinearOperator(toy.mask), NoiseModel::scalar(sigma), rng);
    toy.task = TaskSpec{InpaintTask{toy.mask, sigma}, y};

    // Smooth prior mean distinct from the truth.
    toy.m0 = Image(side, side, 1);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            toy.m0.at(0, i, j) = 0.4 + 0.2 * std::sin(2.0 * std::numbers::pi * (i + j) / side);

    toy.cfg.rho = 0.7;
    toy.cfg.n_mc = n_mc;
    toy.cfg.n_bi = 20;
    toy.cfg.rescale_input = true;
    toy.cfg.early_stop = true;
    toy.cfg.seed = chain_seed;
    return toy;
}

std::string criterion_3() {
    ConjugateToy toy = make_conjugate_toy(31, 1, 2020);
    const GaussianConjugateDenoiser model(toy.m0, toy.tau2, toy.schedule);
    Rng rng(toy.cfg.seed);
    const Chain chain = run_sampler(toy.task, model, toy.schedule, toy.cfg, rng);

    // The t* cap (default 0.10 T = 100) must bind at every iteration: the
    // estimated noise level of the coupled iterate stays far above nu(cap),
    // which pins the z-step kernel and makes the chain time-homogeneous.
    const int cap = chain.config().t_star_cap;
    for (int t : chain.t_star_trace())
        expect(t == cap, "t* " + std::to_string(t) + " departed from the cap " +
                             std::to_string(cap) + "; oracle precondition violated");

    // Exact per-sweep kernel: x-step is N(A z + a, Q^-1) with A = Q^-1/rho^2;
    // the z-step (rescale ON, reverse run cap -> 0) is the conjugate
    // denoising posterior with effective noise rho_eff^2 = nu/(1-nu).
    const int n = 16 * 16;
    const double nu = toy.schedule.noise_variance(cap);
    const double rho_eff2 = nu / (1.0 - nu);
    const double c_gain = toy.tau2 / (toy.tau2 + rho_eff2);
    const double z_var = toy.tau2 * rho_eff2 / (toy.tau2 + rho_eff2);

    const auto& inpaint = std::get<InpaintTask>(toy.task.variant);
    std::vector<bool> obs(n, false);
    for (auto idx : inpaint.mask.kept_indices()) obs[static_cast<std::size_t>(idx)] = true;
    const double s2 = inpaint.sigma * inpaint.sigma;
    const double r2 = toy.cfg.rho * toy.cfg.rho;

    // Dense stationary law of the linear-Gaussian sweep (diagonal matrices,
    // solved with dense linear algebra for generality).
    oracle::Mat q_inv(n, n), gain_a(n, n);
    std::vector<double> a_shift(n, 0.0);
    std::size_t m = 0;
    for (int i = 0; i < n; ++i) {
        q_inv(i, i) = obs[i] ? s2 * r2 / (s2 + r2) : r2;
        gain_a(i, i) = q_inv(i, i) / r2;
        if (obs[i]) {
            a_shift[i] = q_inv(i, i) * toy.task.y.data()[m] / s2;
            ++m;
        }
    }
    // x_{k+1} = M x_k + (A b_z + a) + noise, M = A c.
    oracle::Mat big_m = gain_a;
    for (int i = 0; i < n; ++i) big_m(i, i) *= c_gain;
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i)
        rhs[i] = gain_a(i, i) * (1.0 - c_gain) * toy.m0.data()[i] + a_shift[i];
    oracle::Mat i_minus_m = oracle::Mat::identity(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) i_minus_m(i, j) -= big_m(i, j);
    const auto mu_inf = oracle::chol_solve(oracle::cholesky(i_minus_m), rhs);
    // Noise covariance per sweep: A (z_var I) A^T + Q^-1; stationary solves
    // S = M S M^T + C, closed-form here since M is diagonal.
    std::vector<double> s_inf(n), m_diag(n);
    for (int i = 0; i < n; ++i) {
        m_diag[i] = big_m(i, i);
        const double c_noise = gain_a(i, i) * gain_a(i, i) * z_var + q_inv(i, i);
        s_inf[i] = c_noise / (1.0 - m_diag[i] * m_diag[i]);
    }

    // Chain moments over the 2000 post-burn-in samples.
    const int n_post = toy.cfg.n_mc - toy.cfg.n_bi;
    oracle::MomentAccumulator acc(static_cast<std::size_t>(n));
    const auto& xs = chain.x_samples();
    for (int k = toy.cfg.n_bi; k < toy.cfg.n_mc; ++k) acc.add(xs[k].data());

    double worst_mean_z = 0.0;
    int var_ok = 0;
    for (int i = 0; i < n; ++i) {
        // Exact AR(1) standard error of the sample mean.
        const double r = m_diag[i];
        const double n_d = static_cast<double>(n_post);
        const double mean_var =
            s_inf[i] / n_d *
            ((1.0 + r) / (1.0 - r) - 2.0 * r * (1.0 - std::pow(r, n_d)) / (n_d * (1.0 - r) * (1.0 - r)));
        const double z_mean = std::abs(acc.mean[i] - mu_inf[i]) / std::sqrt(mean_var);
        worst_mean_z = std::max(worst_mean_z, z_mean);

        const double n_eff_var = n_d * (1.0 - r * r) / (1.0 + r * r);
        const double se_var = s_inf[i] * std::sqrt(2.0 / n_eff_var);
        if (std::abs(acc.variance(i) - s_inf[i]) <= 4.0 * se_var) ++var_ok;
    }
    expect(worst_mean_z <= 3.0,
           "worst pixel mean z-score " + format_double(worst_mean_z) + " > 3");
    const double var_frac = static_cast<double>(var_ok) / n;
    expect(var_frac >= 0.95, "only " + format_double(100.0 * var_frac) +
                                 "% of pixel variances within 4 SE (need 95%)");
    return "2000 post-burn-in samples vs dense stationary law: worst mean z " +
           format_double(worst_mean_z) + ", " + format_double(100.0 * var_frac) +
           "% of variances within 4 SE";
}

// ---------------------------------------------------------------------------
// Criterion 4: schedule correctness
// ---------------------------------------------------------------------------

std::string criterion_4() {
    const Schedule lin = build_linear_schedule(1000, 1e-4, 2e-2);
    expect(lin.beta(1) == 1e-4, "beta(1) != 1e-4 exactly");
    expect(lin.beta(1000) == 2e-2, "beta(T) != 2e-2 exactly");
    const Schedule cos = build_cosine_schedule(1000, 0.008);
    expect(cos.noise_variance(0) == 0.0, "cosine nu(0) != 0");
    expect(cos.noise_variance(1000) == 1.0, "cosine nu(T) != 1");
    for (const Schedule& s : {lin, cos}) {
        for (int t = 1; t <= s.steps(); ++t)
            expect(s.noise_variance(t) > s.noise_variance(t - 1),
                   "nu not strictly increasing at t=" + std::to_string(t));
        for (int t = 0; t <= s.steps(); ++t)
            expect(s.invert_noise_variance(s.noise_variance(t)) == t,
                   "inversion not the identity at t=" + std::to_string(t));
    }
    return "linear endpoints exact, nu strictly increasing, inversion identity on both grids";
}

// ---------------------------------------------------------------------------
// Criterion 5: forward composition
// ---------------------------------------------------------------------------

std::string criterion_5() {
    const Schedule s = build_linear_schedule(1000, 1e-4, 2e-2);
    Rng rng(505);
    const Image u0 = testutil::random_image(4, 4, 1, rng);
    const int draws = 10000;
    double worst = 0.0;
    for (int t : {1, 10, 100}) {
        oracle::MomentAccumulator direct(u0.size()), composed(u0.size());
        for (int d = 0; d < draws; ++d) {
            direct.add(forward_diffuse(u0, t, s, rng).data());
            Image u = u0;
            for (int j = 1; j <= t; ++j) {
                const double a = std::sqrt(1.0 - s.beta(j));
                const double sd = std::sqrt(s.beta(j));
                for (double& v : u.data()) v = a * v + sd * rng.normal();
            }
            composed.add(u.data());
        }
        const double nu = s.noise_variance(t);
        const double se_mean = std::sqrt(2.0 * nu / draws);
        const double se_var = nu * std::sqrt(2.0 / (draws - 1)) * std::sqrt(2.0);
        for (std::size_t i = 0; i < u0.size(); ++i) {
            worst = std::max(worst, std::abs(direct.mean[i] - composed.mean[i]) / se_mean);
            worst = std::max(worst,
                             std::abs(direct.variance(i) - composed.variance(i)) / se_var);
        }
    }
    expect(worst <= 4.0, "worst z-score " + format_double(worst) + " > 4");
    return "t in {1,10,100}, single-shot vs sequential, worst z " + format_double(worst);
}

// ---------------------------------------------------------------------------
// Criterion 6: noise estimator
// ---------------------------------------------------------------------------

std::string criterion_6() {
    std::string detail;
    for (double sigma : {0.05, 0.1, 0.2}) {
        double dev_flat = 0.0, dev_tex = 0.0;
        for (int seed = 0; seed < 100; ++seed) {
            Rng rng(6000 + seed);
            Image flat(64, 64, 1, 0.5);
            Image tex = testutil::synthetic_image(64, 64, 1);
            for (std::size_t i = 0; i < flat.size(); ++i) {
                flat.data()[i] += sigma * rng.normal();
                tex.data()[i] += sigma * rng.normal();
            }
            dev_flat += std::abs(estimate_sigma(flat).sigma - sigma) / sigma;
            dev_tex += std::abs(estimate_sigma(tex).sigma - sigma) / sigma;
        }
        dev_flat /= 100.0;
        dev_tex /= 100.0;
        expect(dev_flat <= 0.15, "flat image: mean relative error " + format_double(dev_flat) +
                                     " > 0.15 at sigma " + format_double(sigma));
        expect(dev_tex <= 0.15, "textured image: mean relative error " + format_double(dev_tex) +
                                    " > 0.15 at sigma " + format_double(sigma));
        detail += format_double(sigma) + ":" + format_double(std::max(dev_flat, dev_tex)) + " ";
    }
    return "mean relative error by sigma (worst of flat/textured): " + detail;
}

// ---------------------------------------------------------------------------
// Criterion 7: t*-trace stabilization
// ---------------------------------------------------------------------------

std::string criterion_7() {
    int passing = 0;
    for (int seed = 0; seed < 20; ++seed) {
        ConjugateToy toy = make_conjugate_toy(31, 1000 + seed, 120);
        const GaussianConjugateDenoiser model(toy.m0, toy.tau2, toy.schedule);
        Rng rng(toy.cfg.seed);
        const Chain chain = run_sampler(toy.task, model, toy.schedule, toy.cfg, rng);
        const auto& trace = chain.t_star_trace();

        // Windowed median (window 11) must be non-increasing after burn-in.
        auto window_median = [&](int center) {
            std::vector<int> win;
            for (int k = std::max(toy.cfg.n_bi, center - 5);
                 k <= std::min(static_cast<int>(trace.size()) - 1, center + 5); ++k)
                win.push_back(trace[k]);
            std::sort(win.begin(), win.end());
            return win[win.size() / 2];
        };
        bool ok = true;
        int prev = window_median(toy.cfg.n_bi);
        for (int c = toy.cfg.n_bi + 1; c < static_cast<int>(trace.size()); ++c) {
            const int med = window_median(c);
            if (med > prev) ok = false;
            prev = med;
        }
        // Last-20-iteration range <= 2 grid steps.
        int lo = trace.back(), hi = trace.back();
        for (std::size_t k = trace.size() - 20; k < trace.size(); ++k) {
            lo = std::min(lo, trace[k]);
            hi = std::max(hi, trace[k]);
        }
        if (hi - lo > 2) ok = false;
        if (ok) ++passing;
    }
    expect(passing >= 18, "only " + std::to_string(passing) + "/20 seeds satisfied the t*-trace checks");
    return std::to_string(passing) + "/20 seeds: windowed median non-increasing, last-20 range <= 2";
}

// ---------------------------------------------------------------------------
// Criterion 8: restoration utility bar
// ---------------------------------------------------------------------------

std::string criterion_8() {
    const int side = 64;
    const Image truth = testutil::synthetic_image(side, side, 1);
    Rng rng(808);
    const MaskOperator mask = random_mask(side, side, 0.8, rng);
    const double sigma = 0.05;
    const Image y = degrade(truth, LinearOperator(mask), NoiseModel::scalar(sigma), rng);
    const TaskSpec task{InpaintTask{mask, sigma}, y};

    // Analytic denoiser whose prior mean is a blurred oracle image.
    const CirculantOperator blur(gaussian_kernel(7, 2.0), side, side);
    const Image m0 = blur.apply(truth);

    const Schedule schedule = build_linear_schedule(1000, 1e-4, 2e-2);
    const GaussianConjugateDenoiser model(m0, 0.01, schedule);
    SamplerConfig cfg;
    cfg.rho = 0.7;
    cfg.n_mc = 100;
    cfg.n_bi = 20;
    cfg.rescale_input = true;
    cfg.seed = 2;
    Rng chain_rng(cfg.seed);
    const Chain chain = run_sampler(task, model, schedule, cfg, chain_rng);

    const Image baseline = initial_state(task);  // mean-filled degraded image
    const double psnr_baseline = psnr(truth, baseline);
    const double psnr_mmse = psnr(truth, chain.mmse_x());
    expect(psnr_mmse >= psnr_baseline + 3.0,
           "MMSE " + format_double(psnr_mmse) + " dB vs baseline " +
               format_double(psnr_baseline) + " dB: gain < 3 dB");
    return "MMSE " + format_double(psnr_mmse) + " dB vs mean-filled baseline " +
           format_double(psnr_baseline) + " dB";
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism of the checkpoint
// ---------------------------------------------------------------------------

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckFailure{"cannot open " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string criterion_9() {
    testutil::ScratchDir dir("acceptance_c9");
    // Criterion-3 toy rebuilt through the CLI pipeline.
    const ConjugateToy toy = make_conjugate_toy(31, 6, 2020);
    {
        std::vector<float> buf(toy.truth.size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(toy.truth.data()[i]);
        npy::write_f4(dir.path("truth.npy"), {1, 16, 16}, buf);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(toy.m0.data()[i]);
        npy::write_f4(dir.path("m0.npy"), {1, 16, 16}, buf);
    }
    const json degrade_cfg{
        {"task", {{"variant", "inpaint"}, {"masked_fraction", 0.8}, {"sigma", 0.05}}},
        {"io", {{"input", dir.path("truth.npy")}, {"outdir", dir.path("deg")}}},
        {"seed", 31}};
    std::ofstream(dir.path("degrade.json")) << degrade_cfg.dump();
    expect(cmd_degrade(dir.path("degrade.json"), std::nullopt) == 0, "degrade failed");

    const json run_cfg{{"task",
                        {{"variant", "inpaint"},
                         {"y", dir.path("deg") + "/y.npy"},
                         {"mask", dir.path("deg") + "/mask.npy"},
                         {"sigma", 0.05}}},
                       {"schedule",
                        {{"kind", "linear"},
                         {"steps", 1000},
                         {"beta_start", 1e-4},
                         {"beta_end", 2e-2}}},
                       {"sampler",
                        {{"rho", 0.7},
                         {"n_mc", 2020},
                         {"n_bi", 20},
                         {"rescale_input", true},
                         {"seed", 12}}},
                       {"denoiser",
                        {{"kind", "analytic"},
                         {"prior_mean", {{"kind", "file"}, {"path", dir.path("m0.npy")}}},
                         {"tau2", 0.25}}},
                       {"io", {{"outdir", dir.path("out")}}}};
    std::ofstream(dir.path("run.json")) << run_cfg.dump();

    // The same config file twice; snapshot the checkpoint bytes in between.
    const char* names[] = {"x_samples.npy", "z_samples.npy", "t_star_trace.npy", "manifest.json"};
    expect(cmd_run(dir.path("run.json"), std::nullopt, 1) == 0, "first run failed");
    std::vector<std::string> first;
    for (const char* name : names)
        first.push_back(read_file_bytes(dir.path("out") + "/checkpoint/" + name));
    expect(cmd_run(dir.path("run.json"), std::nullopt, 1) == 0, "second run failed");
    for (std::size_t k = 0; k < 4; ++k) {
        const auto again = read_file_bytes(dir.path("out") + "/checkpoint/" + names[k]);
        expect(again == first[k],
               std::string(names[k]) + " differs between identically-seeded runs");
    }
    return "checkpoint byte-identical across repeated runs (x, z, trace, manifest)";
}

// ---------------------------------------------------------------------------
// Criterion 10: PNPD protocol conformance
// ---------------------------------------------------------------------------

std::string criterion_10() {
    // Loopback identity round trip, bit-exact float32 payload.
    const ExternalDenoiser identity({PNPD_SERVER_BIN}, 30.0);
    Rng rng(1010);
    Image u(32, 32, 3);
    for (double& v : u.data()) v = static_cast<double>(static_cast<float>(rng.normal()));
    const Image out = identity.run_reverse(u, 77, 0, rng);
    for (std::size_t i = 0; i < u.size(); ++i)
        expect(static_cast<float>(out.data()[i]) == static_cast<float>(u.data()[i]),
               "payload not bit-exact at element " + std::to_string(i));

    // Malformed magic from the server must surface as exit code 5 from the
    // CLI with a protocol diagnostic.
    testutil::ScratchDir dir("acceptance_c10");
    {
        const Image truth = testutil::synthetic_image(8, 8, 1);
        std::vector<float> buf(truth.size());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(truth.data()[i]);
        npy::write_f4(dir.path("truth.npy"), {1, 8, 8}, buf);
    }
    const json degrade_cfg{
        {"task", {{"variant", "inpaint"}, {"masked_fraction", 0.5}, {"sigma", 0.05}}},
        {"io", {{"input", dir.path("truth.npy")}, {"outdir", dir.path("deg")}}},
        {"seed", 1}};
    std::ofstream(dir.path("degrade.json")) << degrade_cfg.dump();
    expect(cmd_degrade(dir.path("degrade.json"), std::nullopt) == 0, "degrade failed");
    const json run_cfg{{"task",
                        {{"variant", "inpaint"},
                         {"y", dir.path("deg") + "/y.npy"},
                         {"mask", dir.path("deg") + "/mask.npy"},
                         {"sigma", 0.05}}},
                       {"schedule",
                        {{"kind", "linear"},
                         {"steps", 100},
                         {"beta_start", 1e-4},
                         {"beta_end", 2e-2}}},
                       {"sampler", {{"rho", 0.7}, {"n_mc", 4}, {"n_bi", 1}, {"seed", 1}}},
                       {"denoiser",
                        {{"kind", "external"},
                         {"command", {PNPD_SERVER_BIN, "--corrupt-magic"}},
                         {"timeout_seconds", 30.0}}},
                       {"io", {{"outdir", dir.path("out")}}}};
    std::ofstream(dir.path("run.json")) << run_cfg.dump();

    const std::string cmd = std::string(PNP_SGS_BIN) + " run --config " + dir.path("run.json") +
                            " > /dev/null 2> " + dir.path("stderr.txt");
    const int rc = std::system(cmd.c_str());
    expect(WIFEXITED(rc), "pnp-sgs did not exit normally");
    expect(WEXITSTATUS(rc) == 5,
           "expected exit 5, got " + std::to_string(WEXITSTATUS(rc)));
    const std::string diag = read_file_bytes(dir.path("stderr.txt"));
    expect(diag.find("magic") != std::string::npos || diag.find("pnpd") != std::string::npos,
           "stderr carries no protocol diagnostic: " + diag);
    return "identity loopback bit-exact; malformed magic -> exit 5 with protocol diagnostic";
}

}  // namespace

int main(int argc, char** argv) {
    using CriterionFn = std::function<std::string()>;
    const std::vector<std::pair<std::string, CriterionFn>> criteria = {
        {"SMW identity vs dense inverse (1e-10)", criterion_1},
        {"exact Gaussian x-steps, 2e4 draws, 4 SE", criterion_2},
        {"conjugate end-to-end posterior match", criterion_3},
        {"schedule endpoints, monotonicity, inversion", criterion_4},
        {"forward single-shot vs sequential, 4 SE", criterion_5},
        {"wavelet noise estimator within 15%", criterion_6},
        {"t*-trace stabilization over 20 seeds", criterion_7},
        {"inpainting MMSE beats mean-fill by 3 dB", criterion_8},
        {"byte-identical checkpoint determinism", criterion_9},
        {"PNPD protocol conformance + exit 5", criterion_10},
    };

    std::vector<int> selected;
    for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
    if (selected.empty())
        for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

    int failures = 0;
    for (int idx : selected) {
        if (idx < 1 || idx > static_cast<int>(criteria.size())) {
            std::cout << "[FAIL] criterion " << idx << ": no such criterion\n";
            ++failures;
            continue;
        }
        const auto& [label, fn] = criteria[static_cast<std::size_t>(idx - 1)];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const std::string detail = fn();
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("[PASS] criterion %2d: %s — %s (%.1f s)\n", idx, label.c_str(),
                        detail.c_str(), dt);
        } catch (const CheckFailure& f) {
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("[FAIL] criterion %2d: %s — %s (%.1f s)\n", idx, label.c_str(),
                        f.message.c_str(), dt);
            ++failures;
        } catch (const std::exception& e) {
            std::printf("[FAIL] criterion %2d: %s — unexpected error: %s\n", idx, label.c_str(),
                        e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
