#pragma once

#include <string>
#include <vector>

namespace pnpsgs {

/// Diffusion variance schedule: per-step variances beta(1..T), the cumulative
/// noise variance nu(t) = 1 - prod_{j<=t}(1 - beta(j)), and the mean scale
/// sqrt(1 - nu(t)).
///
/// nu is strictly increasing with nu(0) = 0, so it is invertible on the grid.
class Schedule {
public:
    int steps() const { return T_; }

    /// beta(t), 1 <= t <= T. For the cosine schedule these are the implied
    /// per-step variances, clipped to (0, 0.999].
    double beta(int t) const;

    /// nu(t), 0 <= t <= T.
    double noise_variance(int t) const;

    /// sqrt(1 - nu(t)).
    double signal_scale(int t) const;

    /// Exact one-step squared mean scale (1 - nu(t)) / (1 - nu(t-1)). For the
    /// cosine schedule this is the unclipped value implied by the nu table.
    double step_scale2(int t) const;

    /// argmin over t in {0..T} of |nu(t) - sigma2|; ties break toward the
    /// smaller t; sigma2 beyond nu(T) returns T.
    int invert_noise_variance(double sigma2) const;

    /// Human-readable identifier, e.g. "linear:T=1000,b0=0.0001,bT=0.02".
    const std::string& id() const { return id_; }

    friend Schedule build_linear_schedule(int T, double beta_start, double beta_end);
    friend Schedule build_cosine_schedule(int T, double offset);

private:
    int T_ = 0;
    std::vector<double> beta_;       // index 0 unused
    std::vector<double> noise_var_;  // nu(0..T)
    std::vector<double> scale_;      // sqrt(1 - nu)
    std::string id_;

    void check_t(int t, int lo) const;
};

/// Linear schedule: beta(j) = b0 + (bT - b0)*(j-1)/(T-1); endpoints land on b0
/// and bT exactly.
Schedule build_linear_schedule(int T, double beta_start, double beta_end);

/// Cosine schedule: nu(t) = 1 - gamma(t)/gamma(0) with
/// gamma(t) = cos^2((pi/2)*((t/T + s)/(1 + s))). nu is primary; beta is
/// derived from consecutive nu values and clipped to (0, 0.999].
Schedule build_cosine_schedule(int T, double offset);

}  // namespace pnpsgs
