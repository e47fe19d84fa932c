#include "pnpsgs/denoiser.hpp"

#include <cmath>

#include "pnpsgs/errors.hpp"

namespace pnpsgs {

Image DenoiserModel::run_reverse(const Image& u_start, int t_start, int t_stop, Rng& rng) const {
    if (t_stop < 0 || t_stop > t_start)
        throw ParameterError("run_reverse: require 0 <= t_stop <= t_start");
    Image u = u_start;
    for (int t = t_start; t > t_stop; --t) u = reverse_step(*this, u, t, rng);
    return u;
}

Image forward_diffuse(const Image& u0, int t, const Schedule& s, Rng& rng) {
    const double nu = s.noise_variance(t);  // validates 0 <= t <= T
    if (t == 0) return u0;
    const double scale = s.signal_scale(t);
    const double sd = std::sqrt(nu);
    Image out = u0;
    for (double& v : out.data()) v = scale * v + sd * rng.normal();
    return out;
}

Image reverse_step(const DenoiserModel& model, const Image& u_t, int t, Rng& rng) {
    if (t < 1) throw ParameterError("reverse_step: t must be >= 1");
    ReverseMoments m = model.reverse_moments(u_t, t);
    if (!m.mean.same_shape(u_t) || !m.var_diag.same_shape(u_t))
        throw SamplerError("reverse_step: model output shape differs from input");
    Image out = m.mean;
    const auto& var = m.var_diag.data();
    auto& dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (!(var[i] > 0.0))
            throw SamplerError("reverse_step: model returned nonpositive variance at t=" +
                               std::to_string(t));
        dst[i] += std::sqrt(var[i]) * rng.normal();
    }
    return out;
}

GaussianConjugateDenoiser::GaussianConjugateDenoiser(Image prior_mean, double prior_var,
                                                     const Schedule& schedule)
    : m0_(std::move(prior_mean)), tau2_(prior_var), schedule_(&schedule) {
    if (!(tau2_ > 0.0)) throw ParameterError("conjugate denoiser: tau2 must be > 0");
    require_finite(m0_, "conjugate denoiser prior mean");
}

double GaussianConjugateDenoiser::marginal_var(int t) const {
    const double nu = schedule_->noise_variance(t);
    return nu + (1.0 - nu) * tau2_;
}

ReverseMoments GaussianConjugateDenoiser::reverse_moments(const Image& u_t, int t) const {
    if (t < 1) throw ParameterError("conjugate denoiser: t must be >= 1");
    // Joint Gaussian chain: u_t = a_t u_{t-1} + sqrt(beta_t) eps with
    // a_t^2 = (1-nu_t)/(1-nu_{t-1}) taken from the nu table so the kernel is
    // exact for both schedule families. Conditioning (u_{t-1} | u_t) gives
    //   mean = m_{t-1} + a_t V_{t-1} / V_t * (u_t - m_t)
    //   var  = V_{t-1} beta_t / V_t
    // with V_t = nu_t + (1-nu_t) tau2 the marginal variance of u_t and
    // m_t = signal_scale(t) * m0 the marginal mean.
    const double a2 = schedule_->step_scale2(t);
    const double a = std::sqrt(a2);
    const double beta = 1.0 - a2;
    const double v_prev = marginal_var(t - 1);
    const double v_cur = a2 * v_prev + beta;  // equals marginal_var(t) by construction
    const double gain = a * v_prev / v_cur;
    const double var = std::max(v_prev * beta / v_cur, 1e-300);
    const double s_prev = schedule_->signal_scale(t - 1);
    const double s_cur = a * s_prev;

    ReverseMoments out{Image(u_t.height(), u_t.width(), u_t.channels()),
                       Image(u_t.height(), u_t.width(), u_t.channels(), var)};
    const auto& ut = u_t.data();
    const auto& m0 = m0_.data();
    auto& mean = out.mean.data();
    for (std::size_t i = 0; i < ut.size(); ++i)
        mean[i] = s_prev * m0[i] + gain * (ut[i] - s_cur * m0[i]);
    return out;
}

std::pair<double, double> GaussianConjugateDenoiser::posterior_u0_given_ut(double value, double m0,
                                                                           int t) const {
    const double nu = schedule_->noise_variance(t);
    const double s = schedule_->signal_scale(t);
    const double v_t = nu + s * s * tau2_;
    const double gain = s * tau2_ / v_t;
    const double mean = m0 + gain * (value - s * m0);
    const double var = tau2_ * nu / v_t;
    return {mean, var};
}

}  // namespace pnpsgs
