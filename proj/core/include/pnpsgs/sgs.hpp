#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "pnpsgs/denoiser.hpp"
#include "pnpsgs/image.hpp"
#include "pnpsgs/operators.hpp"
#include "pnpsgs/rng.hpp"
#include "pnpsgs/schedule.hpp"

namespace pnpsgs {

// ---------------------------------------------------------------------------
// Task definitions
// ---------------------------------------------------------------------------

/// y = H x + n with H circulant; scalar or spatially-variant Gaussian noise.
struct DeblurTask {
    CirculantOperator op;
    NoiseModel noise;
};

/// y = H x + n with H a binary subsampling and white noise of std sigma.
struct InpaintTask {
    MaskOperator mask;
    double sigma = 0.0;
};

/// y = S B x + n; double splitting with couplings rho1 (blur split) and rho2
/// (denoiser split). The x-conditional's precision B^T B / rho1^2 can be
/// singular, hence the explicit spectral ridge.
struct SuperResTask {
    CirculantOperator blur;
    MaskOperator mask;
    double sigma = 0.0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    std::optional<double> ridge;  // default 1e-6 / rho1^2
};

struct TaskSpec {
    std::variant<DeblurTask, InpaintTask, SuperResTask> variant;
    Image y;
};

// ---------------------------------------------------------------------------
// Sampler configuration and outputs
// ---------------------------------------------------------------------------

struct SamplerConfig {
    double rho = 0.7;
    int n_mc = 100;
    int n_bi = 20;
    bool early_stop = true;      // burn-in reverse runs stop at ceil(t*/2)
    bool rescale_input = false;  // scale the z-step input by sqrt(1 - nu(t*))
    int t_star_cap = -1;         // -1: default round(0.10 T)
    std::uint64_t seed = 0;
    double ci_level = 0.9;
    int max_chain_megabytes = 1024;  // beyond this the chain stores summaries only

    void validate() const;
};

/// Ordered record of the sampler run. Full mode keeps every (x, z) pair;
/// thin mode (triggered by the memory budget) keeps running moments plus a
/// uniform reservoir of x samples for quantiles.
class Chain {
public:
    Chain(int n_mc, int n_bi, SamplerConfig cfg, const Image& shape_like, bool thin);

    void record(const Image& x, const Image& z, int t_star);

    int n_mc() const { return n_mc_; }
    int n_bi() const { return n_bi_; }
    int recorded() const { return recorded_; }
    bool thin() const { return thin_; }
    const SamplerConfig& config() const { return cfg_; }
    const std::vector<int>& t_star_trace() const { return t_star_trace_; }

    /// Full mode only.
    const std::vector<Image>& x_samples() const;
    const std::vector<Image>& z_samples() const;

    /// Post-burn-in empirical means (exact in both modes).
    Image mmse_x() const;
    Image mmse_z() const;

    /// Per-pixel sample standard deviation (n-1 denominator) of post-burn-in
    /// x samples; exact in both modes.
    Image pixel_std_x() const;

    /// Per-pixel empirical quantiles of post-burn-in x samples with linear
    /// interpolation between order statistics; reservoir-approximate in thin
    /// mode.
    std::pair<Image, Image> credible_interval_x(double level) const;

private:
    int n_mc_ = 0;
    int n_bi_ = 0;
    int recorded_ = 0;
    bool thin_ = false;
    SamplerConfig cfg_;
    std::vector<int> t_star_trace_;

    std::vector<Image> x_samples_;
    std::vector<Image> z_samples_;

    // Thin-mode accumulators over post-burn-in samples.
    Image mean_x_, m2_x_, mean_z_, m2_z_;
    std::vector<Image> reservoir_;
    int reservoir_capacity_ = 64;
    int post_count_ = 0;
    Rng reservoir_rng_;

    void accumulate(const Image& x, const Image& z);
};

struct PosteriorSummary {
    Image mmse_x;
    Image mmse_z;
    Image ci_lower;
    Image ci_upper;
    Image pixel_std;
    double level = 0.9;
};

// ---------------------------------------------------------------------------
// Exact Gaussian conditional samplers (one draw each)
// ---------------------------------------------------------------------------

/// Deblurring x-step, N(mu_x, Q_x^{-1}) with Q_x = H^T Omega H + I/rho^2.
/// Scalar noise samples in the DFT domain; spatially-variant noise uses exact
/// perturbation-optimization with a conjugate-gradient solve (tol 1e-10).
Image sample_x_deblur(const Image& y, const Image& z, const CirculantOperator& op,
                      const NoiseModel& noise, double rho, Rng& rng);

/// Inpainting x-step; the posterior covariance is diagonal (Woodbury):
/// observed pixels sigma^2 rho^2/(sigma^2+rho^2), unobserved rho^2.
Image sample_x_inpaint(const Image& y, const Image& z, const MaskOperator& mask, double sigma,
                       double rho, Rng& rng);

/// Super-resolution z1-step: diagonal precision S^T S / sigma^2 + I/rho1^2
/// with prior mean B x.
Image sample_sr_z1(const Image& y, const Image& x, const MaskOperator& mask,
                   const CirculantOperator& blur, double sigma, double rho1, Rng& rng);

/// Super-resolution x-step: precision B^T B / rho1^2 + ridge I in the DFT
/// domain. Raises SamplerError when the regularized spectrum falls below the
/// 1e-12 floor instead of silently regularizing.
Image sample_sr_x(const Image& z1, const CirculantOperator& blur, double rho1, Rng& rng,
                  double ridge);

/// Conjugate-gradient solve of S x = b for a symmetric positive definite
/// operator given as a callback; relative residual tolerance on ||b||.
std::vector<double> conjugate_gradient(
    const std::function<std::vector<double>(const std::vector<double>&)>& apply_matrix,
    const std::vector<double>& rhs, double tol, int max_iter);

// ---------------------------------------------------------------------------
// Algorithm driver and posterior summaries
// ---------------------------------------------------------------------------

/// Initial splitting variable z^(0): the observation lifted to image space
/// (deblur: y; inpaint: scatter with the observed mean in the holes;
/// super-resolution: adjoint upsample of y).
Image initial_state(const TaskSpec& task);

/// Runs the split Gibbs sweep for cfg.n_mc iterations: the task's exact
/// Gaussian x-step, noise-level estimation, schedule inversion for t*, then
/// the denoiser's reverse run as the z-step.
Chain run_sampler(const TaskSpec& task, const DenoiserModel& model, const Schedule& schedule,
                  const SamplerConfig& cfg, Rng& rng);

/// Post-burn-in empirical averages of x and z.
std::pair<Image, Image> mmse(const Chain& chain);

/// Pixel-wise empirical quantile band at the given level (e.g. 0.9 gives the
/// 5% and 95% quantiles).
std::pair<Image, Image> credible_interval(const Chain& chain, double level);

PosteriorSummary summarize(const Chain& chain, double level = 0.9);

}  // namespace pnpsgs
