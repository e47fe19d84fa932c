#include "pnpsgs/schedule.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pnpsgs/errors.hpp"

namespace pnpsgs {

void Schedule::check_t(int t, int lo) const {
    if (t < lo || t > T_)
        throw ParameterError("schedule: step index " + std::to_string(t) + " out of range [" +
                             std::to_string(lo) + ", " + std::to_string(T_) + "]");
}

double Schedule::beta(int t) const {
    check_t(t, 1);
    return beta_[t];
}

double Schedule::noise_variance(int t) const {
    check_t(t, 0);
    return noise_var_[t];
}

double Schedule::signal_scale(int t) const {
    check_t(t, 0);
    return scale_[t];
}

double Schedule::step_scale2(int t) const {
    check_t(t, 1);
    return (1.0 - noise_var_[t]) / (1.0 - noise_var_[t - 1]);
}

int Schedule::invert_noise_variance(double sigma2) const {
    if (sigma2 < 0.0) throw ParameterError("schedule: sigma2 must be >= 0");
    if (sigma2 >= noise_var_[T_]) return T_;
    int best = 0;
    double best_dist = std::abs(noise_var_[0] - sigma2);
    for (int t = 1; t <= T_; ++t) {
        const double d = std::abs(noise_var_[t] - sigma2);
        if (d < best_dist) {
            best = t;
            best_dist = d;
        }
    }
    return best;
}

namespace {

std::string format_param(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

Schedule build_linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) throw ParameterError("linear schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw ParameterError("linear schedule: require 0 < b0 <= bT < 1");

    Schedule s;
    s.T_ = T;
    s.beta_.assign(T + 1, 0.0);
    s.noise_var_.assign(T + 1, 0.0);
    s.scale_.assign(T + 1, 1.0);
    for (int j = 1; j <= T; ++j) {
        if (j == 1)
            s.beta_[j] = beta_start;
        else if (j == T)
            s.beta_[j] = beta_end;
        else
            s.beta_[j] = beta_start + (beta_end - beta_start) * (j - 1) / static_cast<double>(T - 1);
    }
    double prod = 1.0;
    for (int j = 1; j <= T; ++j) {
        prod *= 1.0 - s.beta_[j];
        s.noise_var_[j] = 1.0 - prod;
        s.scale_[j] = std::sqrt(prod);
    }
    s.id_ = "linear:T=" + std::to_string(T) + ",b0=" + format_param(beta_start) +
            ",bT=" + format_param(beta_end);
    return s;
}

Schedule build_cosine_schedule(int T, double offset) {
    if (T < 1) throw ParameterError("cosine schedule: T must be >= 1");
    if (!(offset > 0.0)) throw ParameterError("cosine schedule: offset must be > 0");

    Schedule s;
    s.T_ = T;
    s.beta_.assign(T + 1, 0.0);
    s.noise_var_.assign(T + 1, 0.0);
    s.scale_.assign(T + 1, 1.0);

    auto gamma = [T, offset](int t) {
        const double c = std::cos((std::numbers::pi / 2.0) *
                                  ((static_cast<double>(t) / T + offset) / (1.0 + offset)));
        return c * c;
    };
    const double g0 = gamma(0);
    for (int t = 0; t <= T; ++t) {
        s.noise_var_[t] = 1.0 - gamma(t) / g0;
        s.scale_[t] = std::sqrt(1.0 - s.noise_var_[t]);
    }
    for (int j = 1; j <= T; ++j) {
        const double implied = 1.0 - (1.0 - s.noise_var_[j]) / (1.0 - s.noise_var_[j - 1]);
        s.beta_[j] = std::min(std::max(implied, 1e-12), 0.999);
    }
    s.id_ = "cosine:T=" + std::to_string(T) + ",s=" + format_param(offset);
    return s;
}

}  // namespace pnpsgs
