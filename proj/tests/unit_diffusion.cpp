#include <doctest.h>

#include <cmath>

#include "dense.hpp"
#include "pnpsgs/denoiser.hpp"
#include "pnpsgs/errors.hpp"
#include "pnpsgs/schedule.hpp"
#include "test_util.hpp"

using namespace pnpsgs;

TEST_CASE("linear schedule: exact endpoints and nu table") {
    const Schedule s = build_linear_schedule(1000, 1e-4, 2e-2);
    CHECK(s.beta(1) == 1e-4);
    CHECK(s.beta(1000) == 2e-2);
    CHECK(s.noise_variance(0) == 0.0);
    CHECK(s.noise_variance(1) == doctest::Approx(1e-4).epsilon(1e-14));

    // Log-domain oracle for the cumulative product.
    double log_sum = 0.0;
    for (int j = 1; j <= 1000; ++j) log_sum += std::log1p(-s.beta(j));
    const double nu_oracle = 1.0 - std::exp(log_sum);
    CHECK(s.noise_variance(1000) == doctest::Approx(nu_oracle).epsilon(1e-12));

    for (int t = 1; t <= 1000; ++t) {
        CHECK(s.noise_variance(t) > s.noise_variance(t - 1));
        CHECK(s.beta(t) > 0.0);
        CHECK(s.beta(t) < 1.0);
        // signal_scale^2 + nu == 1 by construction
        const double sc = s.signal_scale(t);
        CHECK(sc * sc + s.noise_variance(t) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(s.signal_scale(999) > 0.0);
}

TEST_CASE("cosine schedule: endpoints, monotonicity, beta clipping") {
    const Schedule s = build_cosine_schedule(1000, 0.008);
    CHECK(s.noise_variance(0) == 0.0);
    CHECK(s.noise_variance(1000) == 1.0);
    for (int t = 1; t <= 1000; ++t) {
        CHECK(s.noise_variance(t) > s.noise_variance(t - 1));
        CHECK(s.beta(t) > 0.0);
        CHECK(s.beta(t) <= 0.999);
    }
}

TEST_CASE("schedule inversion: identity on the grid, ties, saturation") {
    for (const Schedule& s :
         {build_linear_schedule(1000, 1e-4, 2e-2), build_cosine_schedule(1000, 0.008)}) {
        for (int t = 0; t <= s.steps(); ++t)
            CHECK(s.invert_noise_variance(s.noise_variance(t)) == t);
        CHECK(s.invert_noise_variance(0.0) == 0);
        CHECK(s.invert_noise_variance(2.0) == s.steps());
    }
    // Exact midpoint breaks toward the smaller index.
    const Schedule s = build_linear_schedule(4, 0.25, 0.25);
    const double mid = 0.5 * (s.noise_variance(1) + s.noise_variance(2));
    CHECK(s.invert_noise_variance(mid) == 1);
}

TEST_CASE("schedule parameter validation") {
    CHECK_THROWS_AS(build_linear_schedule(0, 1e-4, 2e-2), ParameterError);
    CHECK_THROWS_AS(build_linear_schedule(10, 0.0, 0.5), ParameterError);
    CHECK_THROWS_AS(build_linear_schedule(10, 0.6, 0.5), ParameterError);
    CHECK_THROWS_AS(build_cosine_schedule(10, 0.0), ParameterError);
    const Schedule s = build_linear_schedule(10, 1e-3, 1e-2);
    CHECK_THROWS_AS(s.noise_variance(11), ParameterError);
    CHECK_THROWS_AS(s.noise_variance(-1), ParameterError);
    CHECK_THROWS_AS(s.invert_noise_variance(-0.1), ParameterError);
}

TEST_CASE("forward_diffuse: t=0 identity and empirical moments") {
    const Schedule s = build_linear_schedule(100, 1e-3, 2e-2);
    Rng rng(4);
    const Image u0 = testutil::random_image(4, 4, 1, rng);
    const Image same = forward_diffuse(u0, 0, s, rng);
    for (std::size_t i = 0; i < u0.size(); ++i) CHECK(same.data()[i] == u0.data()[i]);

    const int t = 40;
    const int draws = 10000;
    oracle::MomentAccumulator acc(u0.size());
    for (int d = 0; d < draws; ++d) {
        const Image ut = forward_diffuse(u0, t, s, rng);
        acc.add(ut.data());
    }
    const double nu = s.noise_variance(t);
    const double scale = s.signal_scale(t);
    const double se_mean = std::sqrt(nu / draws);
    const double se_var = nu * std::sqrt(2.0 / (draws - 1));
    for (std::size_t i = 0; i < u0.size(); ++i) {
        CHECK(std::abs(acc.mean[i] - scale * u0.data()[i]) <= 4.0 * se_mean);
        CHECK(std::abs(acc.variance(i) - nu) <= 4.0 * se_var);
    }
}

TEST_CASE("single-shot forward equals composed one-step transitions in distribution") {
    const Schedule s = build_linear_schedule(100, 1e-3, 2e-2);
    Rng rng(8);
    const Image u0 = testutil::random_image(4, 4, 1, rng);
    const int t = 10;
    const int draws = 10000;

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
    for (std::size_t i = 0; i < u0.size(); ++i) {
        const double se_mean = std::sqrt(2.0 * nu / draws);
        const double se_var = nu * std::sqrt(2.0 / (draws - 1)) * std::sqrt(2.0);
        CHECK(std::abs(direct.mean[i] - composed.mean[i]) <= 4.0 * se_mean);
        CHECK(std::abs(direct.variance(i) - composed.variance(i)) <= 4.0 * se_var);
    }
}

TEST_CASE("conjugate denoiser reverse moments match dense joint-covariance conditioning") {
    const Schedule s = build_linear_schedule(50, 1e-3, 5e-2);
    Rng rng(15);
    const Image m0 = testutil::random_image(2, 2, 1, rng);
    const int pixels = 4;

    for (double tau2 : {0.3, 1e-12}) {
        const GaussianConjugateDenoiser model(m0, tau2, s);
        for (int t : {1, 7, 50}) {
            // Joint covariance of (u_{t-1}, u_t) stacked as 2P dims.
            const double nu_p = s.noise_variance(t - 1);
            const double nu_c = s.noise_variance(t);
            const double sc_p = s.signal_scale(t - 1);
            const double sc_c = s.signal_scale(t);
            const double a = sc_c / sc_p;
            const double v_prev = nu_p + sc_p * sc_p * tau2;
            const double v_cur = nu_c + sc_c * sc_c * tau2;
            std::vector<double> mu(2 * pixels);
            oracle::Mat sigma(2 * pixels, 2 * pixels);
            for (int i = 0; i < pixels; ++i) {
                mu[i] = sc_p * m0.data()[i];
                mu[pixels + i] = sc_c * m0.data()[i];
                sigma(i, i) = v_prev;
                sigma(pixels + i, pixels + i) = v_cur;
                sigma(i, pixels + i) = sigma(pixels + i, i) = a * v_prev;
            }
            const Image u_t = testutil::random_image(2, 2, 1, rng);
            const auto [cond_mean, cond_cov] = oracle::condition_gaussian(
                mu, sigma, pixels, std::vector<double>(u_t.data().begin(), u_t.data().end()));

            const ReverseMoments got = model.reverse_moments(u_t, t);
            for (int i = 0; i < pixels; ++i) {
                CHECK(std::abs(got.mean.data()[i] - cond_mean[i]) <= 1e-8);
                CHECK(std::abs(got.var_diag.data()[i] - cond_cov(i, i)) <= 1e-8);
                CHECK(got.var_diag.data()[i] > 0.0);
            }
        }
    }
}

TEST_CASE("one reverse step at t=1 recovers the conjugate posterior mean") {
    const Schedule s = build_linear_schedule(50, 1e-3, 5e-2);
    Rng rng(21);
    const Image m0(2, 2, 1, 0.4);
    const double tau2 = 0.2;
    const GaussianConjugateDenoiser model(m0, tau2, s);

    const Image u0 = testutil::random_image(2, 2, 1, rng);
    const Image u1 = forward_diffuse(u0, 1, s, rng);

    const int draws = 10000;
    oracle::MomentAccumulator acc(u1.size());
    for (int d = 0; d < draws; ++d) acc.add(reverse_step(model, u1, 1, rng).data());

    for (std::size_t i = 0; i < u1.size(); ++i) {
        const auto [mean, var] = model.posterior_u0_given_ut(u1.data()[i], 0.4, 1);
        CHECK(std::abs(acc.mean[i] - mean) <= 4.0 * std::sqrt(var / draws));
    }
}

TEST_CASE("full reverse run samples p(u0 | u_t*) exactly (conjugate model)") {
    const Schedule s = build_linear_schedule(60, 1e-3, 4e-2);
    Rng rng(33);
    const Image m0 = testutil::random_image(4, 4, 1, rng);
    const double tau2 = 0.15;
    const GaussianConjugateDenoiser model(m0, tau2, s);

    const int t_star = 25;
    const Image u0 = testutil::random_image(4, 4, 1, rng);
    const Image u_start = forward_diffuse(u0, t_star, s, rng);  // fixed once

    const int draws = 10000;
    oracle::MomentAccumulator acc(u_start.size());
    for (int d = 0; d < draws; ++d) acc.add(model.run_reverse(u_start, t_star, 0, rng).data());

    for (std::size_t i = 0; i < u_start.size(); ++i) {
        const auto [mean, var] =
            model.posterior_u0_given_ut(u_start.data()[i], m0.data()[i], t_star);
        CHECK(std::abs(acc.mean[i] - mean) <= 4.0 * std::sqrt(var / draws));
        CHECK(std::abs(acc.variance(i) - var) <= 4.0 * var * std::sqrt(2.0 / (draws - 1)));
    }
}

namespace {

/// Spy model: forwards to a conjugate model while recording the visited steps.
class RecordingModel final : public DenoiserModel {
public:
    RecordingModel(const GaussianConjugateDenoiser& inner) : inner_(inner) {}
    ReverseMoments reverse_moments(const Image& u_t, int t) const override {
        visited.push_back(t);
        return inner_.reverse_moments(u_t, t);
    }
    mutable std::vector<int> visited;

private:
    const GaussianConjugateDenoiser& inner_;
};

}  // namespace

TEST_CASE("run_reverse: identity cases and step-range discipline") {
    const Schedule s = build_linear_schedule(30, 1e-3, 3e-2);
    const Image m0(3, 3, 1, 0.5);
    const GaussianConjugateDenoiser inner(m0, 0.3, s);
    const RecordingModel model(inner);
    Rng rng(2);

    const Image u = testutil::random_image(3, 3, 1, rng);
    const Image same = model.run_reverse(u, 0, 0, rng);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(same.data()[i] == u.data()[i]);
    CHECK(model.visited.empty());

    const Image same2 = model.run_reverse(u, 12, 12, rng);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(same2.data()[i] == u.data()[i]);
    CHECK(model.visited.empty());

    // Early stop: only steps in (t_stop, t_start] are visited.
    (void)model.run_reverse(u, 20, 10, rng);
    REQUIRE(model.visited.size() == 10);
    for (std::size_t k = 0; k < model.visited.size(); ++k)
        CHECK(model.visited[k] == 20 - static_cast<int>(k));

    CHECK_THROWS_AS(model.run_reverse(u, 5, 9, rng), ParameterError);
}

TEST_CASE("reverse_step rejects nonpositive model variances") {
    struct BrokenModel final : DenoiserModel {
        ReverseMoments reverse_moments(const Image& u_t, int) const override {
            return {u_t, Image(u_t.height(), u_t.width(), u_t.channels(), 0.0)};
        }
    };
    const BrokenModel broken;
    Rng rng(1);
    const Image u(2, 2, 1, 0.5);
    CHECK_THROWS_AS(reverse_step(broken, u, 3, rng), SamplerError);
}

TEST_CASE("determinism: identical seeds give bit-identical reverse runs") {
    const Schedule s = build_linear_schedule(40, 1e-3, 2e-2);
    const Image m0(4, 4, 1, 0.5);
    const GaussianConjugateDenoiser model(m0, 0.2, s);
    Rng r1(77), r2(77);
    const Image u(4, 4, 1, 0.8);
    const Image a = model.run_reverse(u, 15, 0, r1);
    const Image b = model.run_reverse(u, 15, 0, r2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}
