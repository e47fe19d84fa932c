#include <algorithm>
#include <cmath>
#include <string>

#include "pnpsgs/errors.hpp"
#include "pnpsgs/noise_estimator.hpp"
#include "pnpsgs/sgs.hpp"

namespace pnpsgs {

void SamplerConfig::validate() const {
    if (!(rho > 0.0)) throw ParameterError("sampler: rho must be > 0");
    if (n_bi < 1 || n_bi >= n_mc)
        throw ParameterError("sampler: require 0 < n_bi < n_mc (got n_bi=" +
                             std::to_string(n_bi) + ", n_mc=" + std::to_string(n_mc) + ")");
    if (!(ci_level > 0.0 && ci_level < 1.0))
        throw ParameterError("sampler: ci_level must be in (0, 1)");
    if (max_chain_megabytes < 1) throw ParameterError("sampler: max_chain_megabytes must be >= 1");
}

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

Chain::Chain(int n_mc, int n_bi, SamplerConfig cfg, const Image& shape_like, bool thin)
    : n_mc_(n_mc),
      n_bi_(n_bi),
      thin_(thin),
      cfg_(std::move(cfg)),
      reservoir_rng_(cfg_.seed ^ 0x9d5c8a7f31e2b406ULL) {
    t_star_trace_.reserve(n_mc);
    if (thin_) {
        mean_x_ = Image(shape_like.height(), shape_like.width(), shape_like.channels());
        m2_x_ = mean_x_;
        mean_z_ = mean_x_;
        m2_z_ = mean_x_;
    } else {
        x_samples_.reserve(n_mc);
        z_samples_.reserve(n_mc);
    }
}

void Chain::accumulate(const Image& x, const Image& z) {
    ++post_count_;
    const double k = static_cast<double>(post_count_);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x.data()[i] - mean_x_.data()[i];
        mean_x_.data()[i] += dx / k;
        m2_x_.data()[i] += dx * (x.data()[i] - mean_x_.data()[i]);
        const double dz = z.data()[i] - mean_z_.data()[i];
        mean_z_.data()[i] += dz / k;
        m2_z_.data()[i] += dz * (z.data()[i] - mean_z_.data()[i]);
    }
    // Uniform reservoir of whole x samples for the quantile band.
    if (static_cast<int>(reservoir_.size()) < reservoir_capacity_) {
        reservoir_.push_back(x);
    } else {
        const auto j = reservoir_rng_.below(static_cast<std::uint64_t>(post_count_));
        if (j < static_cast<std::uint64_t>(reservoir_capacity_)) reservoir_[j] = x;
    }
}

void Chain::record(const Image& x, const Image& z, int t_star) {
    if (recorded_ >= n_mc_) throw SamplerError("chain: more records than n_mc");
    t_star_trace_.push_back(t_star);
    ++recorded_;
    if (thin_) {
        if (recorded_ > n_bi_) accumulate(x, z);
    } else {
        x_samples_.push_back(x);
        z_samples_.push_back(z);
    }
}

const std::vector<Image>& Chain::x_samples() const {
    if (thin_) throw Error("chain: thin mode does not retain full samples");
    return x_samples_;
}

const std::vector<Image>& Chain::z_samples() const {
    if (thin_) throw Error("chain: thin mode does not retain full samples");
    return z_samples_;
}

namespace {

Image average(const std::vector<Image>& samples, int from, int to) {
    Image out(samples[0].height(), samples[0].width(), samples[0].channels());
    for (int n = from; n < to; ++n)
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += samples[n].data()[i];
    const double inv = 1.0 / static_cast<double>(to - from);
    for (double& v : out.data()) v *= inv;
    return out;
}

// Linear interpolation between order statistics of sorted values,
// p = q (n - 1).
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double p = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(p);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = p - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

Image Chain::mmse_x() const {
    if (recorded_ <= n_bi_) throw SamplerError("chain: no post-burn-in samples");
    if (thin_) return mean_x_;
    return average(x_samples_, n_bi_, recorded_);
}

Image Chain::mmse_z() const {
    if (recorded_ <= n_bi_) throw SamplerError("chain: no post-burn-in samples");
    if (thin_) return mean_z_;
    return average(z_samples_, n_bi_, recorded_);
}

Image Chain::pixel_std_x() const {
    const int count = recorded_ - n_bi_;
    if (count < 2) throw SamplerError("chain: need at least 2 post-burn-in samples");
    Image out(mmse_x().height(), mmse_x().width(), mmse_x().channels());
    if (thin_) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data()[i] = std::sqrt(m2_x_.data()[i] / static_cast<double>(post_count_ - 1));
        return out;
    }
    const Image mean = mmse_x();
    for (int n = n_bi_; n < recorded_; ++n)
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = x_samples_[n].data()[i] - mean.data()[i];
            out.data()[i] += d * d;
        }
    for (double& v : out.data()) v = std::sqrt(v / static_cast<double>(count - 1));
    return out;
}

std::pair<Image, Image> Chain::credible_interval_x(double level) const {
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("credible_interval: level in (0,1)");
    const std::vector<Image>* source = &x_samples_;
    int from = n_bi_, to = recorded_;
    if (thin_) {
        source = &reservoir_;
        from = 0;
        to = static_cast<int>(reservoir_.size());
    }
    if (to - from < 2) throw SamplerError("credible_interval: need at least 2 samples");

    const Image& first = (*source)[from];
    Image lower(first.height(), first.width(), first.channels());
    Image upper = lower;
    const double q_lo = (1.0 - level) / 2.0;
    const double q_hi = 1.0 - q_lo;
    std::vector<double> values(static_cast<std::size_t>(to - from));
    for (std::size_t i = 0; i < first.size(); ++i) {
        for (int n = from; n < to; ++n) values[n - from] = (*source)[n].data()[i];
        std::sort(values.begin(), values.end());
        lower.data()[i] = quantile_sorted(values, q_lo);
        upper.data()[i] = quantile_sorted(values, q_hi);
    }
    return {std::move(lower), std::move(upper)};
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace {

void validate_task(const TaskSpec& task) {
    if (const auto* d = std::get_if<DeblurTask>(&task.variant)) {
        if (task.y.height() != d->op.height() || task.y.width() != d->op.width())
            throw ShapeError("task: observation does not match operator output");
        return;
    }
    if (const auto* p = std::get_if<InpaintTask>(&task.variant)) {
        if (!(p->sigma > 0.0)) throw ParameterError("task: sigma must be > 0");
        if (task.y.height() != 1 || task.y.width() != static_cast<int>(p->mask.kept_count()))
            throw ShapeError("task: observation does not match mask output");
        return;
    }
    const auto& sr = std::get<SuperResTask>(task.variant);
    if (!(sr.sigma > 0.0) || !(sr.rho1 > 0.0) || !(sr.rho2 > 0.0))
        throw ParameterError("task: sigma, rho1 and rho2 must be > 0");
    if (task.y.height() != 1 || task.y.width() != static_cast<int>(sr.mask.kept_count()))
        throw ShapeError("task: observation does not match mask output");
}

}  // namespace

Chain run_sampler(const TaskSpec& task, const DenoiserModel& model, const Schedule& schedule,
                  const SamplerConfig& cfg, Rng& rng) {
    cfg.validate();
    validate_task(task);

    SamplerConfig resolved = cfg;
    if (resolved.t_star_cap < 0)
        resolved.t_star_cap = static_cast<int>(std::lround(0.10 * schedule.steps()));
    resolved.t_star_cap = std::min(resolved.t_star_cap, schedule.steps());

    const Image z0 = initial_state(task);
    const std::size_t image_bytes = z0.size() * sizeof(double);
    const bool thin = static_cast<double>(cfg.n_mc) * 2.0 * static_cast<double>(image_bytes) >
                      static_cast<double>(resolved.max_chain_megabytes) * 1024.0 * 1024.0;

    Chain chain(cfg.n_mc, cfg.n_bi, resolved, z0, thin);
    Image z = z0;
    Image x_prev = z0;  // super-resolution sweep starts from the lifted observation

    for (int n = 1; n <= cfg.n_mc; ++n) {
        try {
            Image x;
            Image denoiser_input;
            if (const auto* d = std::get_if<DeblurTask>(&task.variant)) {
                x = sample_x_deblur(task.y, z, d->op, d->noise, resolved.rho, rng);
                denoiser_input = x;
            } else if (const auto* p = std::get_if<InpaintTask>(&task.variant)) {
                x = sample_x_inpaint(task.y, z, p->mask, p->sigma, resolved.rho, rng);
                denoiser_input = x;
            } else {
                const auto& sr = std::get<SuperResTask>(task.variant);
                const double ridge = sr.ridge.value_or(1e-6 / (sr.rho1 * sr.rho1));
                Image z1 = sample_sr_z1(task.y, x_prev, sr.mask, sr.blur, sr.sigma, sr.rho1, rng);
                x = sample_sr_x(z1, sr.blur, sr.rho1, rng, ridge);
                denoiser_input = std::move(z1);  // the second split couples z2 to z1, not to x
            }
            require_finite(x, "x-step");

            const double sigma_hat = estimate_sigma(denoiser_input).sigma;
            const int t_star = std::min(schedule.invert_noise_variance(sigma_hat * sigma_hat),
                                        resolved.t_star_cap);
            if (resolved.rescale_input) {
                const double s = schedule.signal_scale(t_star);
                for (double& v : denoiser_input.data()) v *= s;
            }
            const int t_stop =
                (n <= cfg.n_bi && resolved.early_stop) ? (t_star + 1) / 2 : 0;
            z = model.run_reverse(denoiser_input, t_star, t_stop, rng);
            require_finite(z, "z-step");

            chain.record(x, z, t_star);
            x_prev = std::move(x);
        } catch (const ProtocolError& e) {
            throw ProtocolError("iteration " + std::to_string(n) + ": " + e.what());
        } catch (const Error& e) {
            throw SamplerError("iteration " + std::to_string(n) + ": " + e.what());
        }
    }
    return chain;
}

std::pair<Image, Image> mmse(const Chain& chain) { return {chain.mmse_x(), chain.mmse_z()}; }

std::pair<Image, Image> credible_interval(const Chain& chain, double level) {
    return chain.credible_interval_x(level);
}

PosteriorSummary summarize(const Chain& chain, double level) {
    auto [lower, upper] = chain.credible_interval_x(level);
    return PosteriorSummary{chain.mmse_x(),   chain.mmse_z(),      std::move(lower),
                            std::move(upper), chain.pixel_std_x(), level};
}

}  // namespace pnpsgs
