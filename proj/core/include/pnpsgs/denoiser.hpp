#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "pnpsgs/image.hpp"
#include "pnpsgs/rng.hpp"
#include "pnpsgs/schedule.hpp"

namespace pnpsgs {

/// Moments of the reverse transition kernel q(u_{t-1} | u_t): per-pixel mean
/// and strictly positive per-pixel variance (covariance is diagonal for all
/// bundled models).
struct ReverseMoments {
    Image mean;
    Image var_diag;
};

/// Stochastic denoiser interface: anything that can run the backward
/// diffusion. In-process models implement reverse_moments and inherit the
/// step-by-step run; the external-process model overrides run_reverse and
/// delegates whole runs to its child process.
class DenoiserModel {
public:
    virtual ~DenoiserModel() = default;

    virtual ReverseMoments reverse_moments(const Image& u_t, int t) const = 0;

    /// Iterates reverse steps from t_start down to t_stop+1 and returns
    /// u_{t_stop}; t_start == t_stop returns the input unchanged.
    virtual Image run_reverse(const Image& u_start, int t_start, int t_stop, Rng& rng) const;

    /// True when draws are a pure function of (inputs, rng); false for models
    /// that sample in another process.
    virtual bool in_process() const { return true; }
};

/// Draws u_t | u_0 = sqrt(1 - nu(t)) u_0 + sqrt(nu(t)) eps in one shot.
Image forward_diffuse(const Image& u0, int t, const Schedule& s, Rng& rng);

/// One reverse draw u_{t-1} ~ N(mean, var_diag) using the model's moments.
/// Raises on nonpositive model variance.
Image reverse_step(const DenoiserModel& model, const Image& u_t, int t, Rng& rng);

/// Exact reverse kernel of the diffusion chain when u_0 ~ N(m0, tau2 I).
/// Serves as an analytically verifiable stand-in for a trained network: the
/// composed reverse run from t to 0 samples exactly p(u_0 | u_t).
class GaussianConjugateDenoiser final : public DenoiserModel {
public:
    GaussianConjugateDenoiser(Image prior_mean, double prior_var, const Schedule& schedule);

    ReverseMoments reverse_moments(const Image& u_t, int t) const override;

    /// Closed-form moments of p(u_0 | u_t = value) at a single pixel with
    /// prior mean m0 (exposed for oracle checks).
    std::pair<double, double> posterior_u0_given_ut(double value, double m0, int t) const;

    const Image& prior_mean() const { return m0_; }
    double prior_var() const { return tau2_; }

private:
    Image m0_;
    double tau2_;
    const Schedule* schedule_;

    /// Marginal variance of u_t under the prior: nu(t) + (1 - nu(t)) tau2.
    double marginal_var(int t) const;
};

}  // namespace pnpsgs
