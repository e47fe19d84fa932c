#include "pnpsgs/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pnpsgs/config.hpp"
#include "pnpsgs/errors.hpp"
#include "pnpsgs/external_denoiser.hpp"
#include "pnpsgs/log.hpp"
#include "pnpsgs/metrics.hpp"
#include "pnpsgs/npy.hpp"
#include "pnpsgs/png_io.hpp"
#include "pnpsgs/sgs.hpp"

namespace pnpsgs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int map_exception_to_exit() {
    try {
        throw;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const ProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::protocol;
    } catch (const SamplerError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::sampler;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

std::vector<float> to_f32(const Image& img) {
    std::vector<float> out(img.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(img.data()[i]);
    return out;
}

void save_image_npy(const std::string& path, const Image& img) {
    npy::write_f4(path,
                  {static_cast<std::size_t>(img.channels()), static_cast<std::size_t>(img.height()),
                   static_cast<std::size_t>(img.width())},
                  to_f32(img));
}

void save_measurement_npy(const std::string& path, const Image& y, bool full_grid) {
    if (full_grid) {
        save_image_npy(path, y);
        return;
    }
    npy::write_f4(path,
                  {static_cast<std::size_t>(y.channels()), static_cast<std::size_t>(y.width())},
                  to_f32(y));
}

void save_mask_npy(const std::string& path, const MaskOperator& mask) {
    std::vector<std::int64_t> dense(static_cast<std::size_t>(mask.height()) * mask.width(), 0);
    for (auto idx : mask.kept_indices()) dense[static_cast<std::size_t>(idx)] = 1;
    npy::write_i8(path,
                  {static_cast<std::size_t>(mask.height()), static_cast<std::size_t>(mask.width())},
                  dense);
}

void save_kernel_npy(const std::string& path, const ConvolutionKernel& kernel) {
    std::vector<float> taps(kernel.taps.size());
    for (std::size_t i = 0; i < taps.size(); ++i) taps[i] = static_cast<float>(kernel.taps[i]);
    npy::write_f4(path,
                  {static_cast<std::size_t>(kernel.height), static_cast<std::size_t>(kernel.width)},
                  taps);
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("short write to " + path);
}

json psnr_to_json(double value) {
    if (std::isinf(value)) return json("inf");
    return json(value);
}

}  // namespace

// ---------------------------------------------------------------------------
// degrade
// ---------------------------------------------------------------------------

int cmd_degrade(const std::string& config_path, std::optional<std::uint64_t> seed_override) {
    try {
        DegradeJob job = load_degrade_config(config_path);
        if (seed_override) job.seed = *seed_override;
        const Image x = load_image_file(job.input);
        Rng rng(job.seed);

        fs::create_directories(job.outdir);
        const fs::path out(job.outdir);
        json artifacts;
        json manifest{{"command", "degrade"},
                      {"config", json::parse(job.config_echo)},
                      {"config_digest", job.config_digest},
                      {"seed", job.seed},
                      {"input_shape", {x.channels(), x.height(), x.width()}}};

        auto build_kernel = [&](int fallback_size, double fallback_sigma) {
            if (job.kernel_from_file) return load_kernel_npy(job.kernel_path);
            const int size = job.kernel_size > 0 ? job.kernel_size : fallback_size;
            const double sig = job.kernel_sigma > 0 ? job.kernel_sigma : fallback_sigma;
            return gaussian_kernel(size, sig);
        };

        if (job.variant == DegradeJob::Variant::deblur) {
            const ConvolutionKernel kernel = build_kernel(61, 3.0);
            const CirculantOperator op(kernel, x.height(), x.width());
            NoiseModel noise = NoiseModel::scalar(job.sigma);
            if (job.diagonal_noise) {
                const auto tensor = npy::read(job.variance_map_path);
                noise = NoiseModel::diagonal(
                    std::vector<double>(tensor.data.begin(), tensor.data.end()));
                const Image vm = load_image_file(job.variance_map_path);
                save_image_npy((out / "noise_variances.npy").string(), vm);
                artifacts["noise_variances"] = "noise_variances.npy";
            }
            const Image y = degrade(x, LinearOperator(op), noise, rng);
            save_measurement_npy((out / "y.npy").string(), y, true);
            save_kernel_npy((out / "kernel.npy").string(), kernel);
            write_png((out / "y_preview.png").string(), y);
            artifacts["y"] = "y.npy";
            artifacts["kernel"] = "kernel.npy";
            artifacts["y_preview"] = "y_preview.png";
            manifest["measurement_shape"] = {y.channels(), y.height(), y.width()};
        } else if (job.variant == DegradeJob::Variant::inpaint) {
            const MaskOperator mask = random_mask(x.height(), x.width(), job.masked_fraction, rng);
            const Image y =
                degrade(x, LinearOperator(mask), NoiseModel::scalar(job.sigma), rng);
            save_measurement_npy((out / "y.npy").string(), y, false);
            save_mask_npy((out / "mask.npy").string(), mask);
            write_png((out / "y_preview.png").string(), mask.adjoint(y));
            artifacts["y"] = "y.npy";
            artifacts["mask"] = "mask.npy";
            artifacts["y_preview"] = "y_preview.png";
            manifest["measurement_shape"] = {y.channels(), static_cast<int>(mask.kept_count())};
            manifest["kept_pixels"] = mask.kept_count();
        } else {
            const ConvolutionKernel kernel = build_kernel(9, 1.5);
            const MaskOperator mask = stride_mask(x.height(), x.width(), job.factor);
            const CirculantOperator blur(kernel, x.height(), x.width());
            const ComposedOperator op(mask, blur);
            const Image y = degrade(x, LinearOperator(op), NoiseModel::scalar(job.sigma), rng);
            save_measurement_npy((out / "y.npy").string(), y, false);
            save_mask_npy((out / "mask.npy").string(), mask);
            save_kernel_npy((out / "kernel.npy").string(), kernel);
            // Low-resolution preview: the stride mask keeps a regular grid.
            const int lh = (x.height() + job.factor - 1) / job.factor;
            const int lw = (x.width() + job.factor - 1) / job.factor;
            Image preview(lh, lw, y.channels());
            for (int c = 0; c < y.channels(); ++c)
                std::copy_n(y.channel(c).begin(), y.plane_size(), preview.channel(c).begin());
            write_png((out / "y_preview.png").string(), preview);
            artifacts["y"] = "y.npy";
            artifacts["mask"] = "mask.npy";
            artifacts["kernel"] = "kernel.npy";
            artifacts["y_preview"] = "y_preview.png";
            manifest["measurement_shape"] = {y.channels(), static_cast<int>(mask.kept_count())};
        }
        manifest["artifacts"] = artifacts;
        write_text((out / "manifest.json").string(), manifest.dump(2) + "\n");
        log::info("degrade: wrote artifacts to " + job.outdir);
        return exit_code::ok;
    } catch (...) {
        return map_exception_to_exit();
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace {

std::unique_ptr<DenoiserModel> build_denoiser(const RunJob& job, const Schedule& schedule) {
    if (job.denoiser.kind == DenoiserSpec::Kind::external)
        return std::make_unique<ExternalDenoiser>(job.denoiser.command,
                                                  job.denoiser.timeout_seconds);
    Image m0;
    const Image z0 = initial_state(job.task);
    switch (job.denoiser.prior_mean) {
        case DenoiserSpec::PriorMean::constant:
            m0 = Image(z0.height(), z0.width(), z0.channels(), job.denoiser.prior_mean_value);
            break;
        case DenoiserSpec::PriorMean::file:
            m0 = load_image_file(job.denoiser.prior_mean_path);
            require_same_shape(m0, z0, "denoiser prior mean");
            break;
        case DenoiserSpec::PriorMean::observed:
            m0 = z0;
            break;
    }
    return std::make_unique<GaussianConjugateDenoiser>(std::move(m0), job.denoiser.tau2, schedule);
}

struct TStarSummary {
    int initial = 0;
    int final = 0;
    int stabilization_iteration = 0;  // 1-based; first n with range(trace[n..]) <= 2
};

TStarSummary summarize_trace(const std::vector<int>& trace) {
    TStarSummary s;
    s.initial = trace.front();
    s.final = trace.back();
    int lo = trace.back(), hi = trace.back();
    s.stabilization_iteration = static_cast<int>(trace.size());
    for (int n = static_cast<int>(trace.size()); n >= 1; --n) {
        lo = std::min(lo, trace[n - 1]);
        hi = std::max(hi, trace[n - 1]);
        if (hi - lo <= 2) s.stabilization_iteration = n;
    }
    return s;
}

void run_one_chain(const RunJob& job, const std::string& outdir, std::uint64_t chain_index) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto denoiser = build_denoiser(job, job.schedule);
    Rng rng(job.sampler.seed, chain_index);
    const Chain chain = run_sampler(job.task, *denoiser, job.schedule, job.sampler, rng);

    fs::create_directories(outdir);
    const fs::path out(outdir);
    const fs::path ckpt = out / "checkpoint";
    fs::create_directories(ckpt);

    // Checkpoint: NPY arrays plus a manifest. Everything in this directory is
    // a pure function of (config, seed) for in-process denoisers.
    const int n_mc = chain.n_mc();
    json files;
    if (!chain.thin()) {
        const auto& xs = chain.x_samples();
        const std::size_t per = xs[0].size();
        std::vector<float> buf(static_cast<std::size_t>(n_mc) * per);
        for (int n = 0; n < n_mc; ++n)
            for (std::size_t i = 0; i < per; ++i)
                buf[static_cast<std::size_t>(n) * per + i] = static_cast<float>(xs[n].data()[i]);
        const std::vector<std::size_t> shape{static_cast<std::size_t>(n_mc),
                                             static_cast<std::size_t>(xs[0].channels()),
                                             static_cast<std::size_t>(xs[0].height()),
                                             static_cast<std::size_t>(xs[0].width())};
        npy::write_f4((ckpt / "x_samples.npy").string(), shape, buf);
        const auto& zs = chain.z_samples();
        for (int n = 0; n < n_mc; ++n)
            for (std::size_t i = 0; i < per; ++i)
                buf[static_cast<std::size_t>(n) * per + i] = static_cast<float>(zs[n].data()[i]);
        npy::write_f4((ckpt / "z_samples.npy").string(), shape, buf);
        files["x_samples"] = "x_samples.npy";
        files["z_samples"] = "z_samples.npy";
    }
    std::vector<std::int64_t> trace_i8(chain.t_star_trace().begin(), chain.t_star_trace().end());
    npy::write_i8((ckpt / "t_star_trace.npy").string(), {trace_i8.size()}, trace_i8);
    files["t_star_trace"] = "t_star_trace.npy";

    json manifest{{"command", "run"},
                  {"config", json::parse(job.config_echo)},
                  {"config_digest", job.config_digest},
                  {"schedule_id", job.schedule.id()},
                  {"task_digest", job.task_digest},
                  {"chain_index", chain_index},
                  {"n_mc", chain.n_mc()},
                  {"n_bi", chain.n_bi()},
                  {"t_star_cap", chain.config().t_star_cap},
                  {"thin", chain.thin()},
                  {"files", files}};
    write_text((ckpt / "manifest.json").string(), manifest.dump(2) + "\n");

    // Posterior summaries: NPY is the source of truth, PNG for inspection.
    const PosteriorSummary summary = summarize(chain, job.sampler.ci_level);
    const std::pair<std::string, const Image*> outputs[] = {{"mmse_x", &summary.mmse_x},
                                                            {"mmse_z", &summary.mmse_z},
                                                            {"ci_lower", &summary.ci_lower},
                                                            {"ci_upper", &summary.ci_upper},
                                                            {"pixel_std", &summary.pixel_std}};
    for (const auto& [name, img] : outputs) {
        save_image_npy((out / (name + ".npy")).string(), *img);
        write_png((out / (name + ".png")).string(), *img);
    }

    std::string csv = "n,t_star\n";
    for (int n = 0; n < n_mc; ++n)
        csv += std::to_string(n + 1) + "," + std::to_string(chain.t_star_trace()[n]) + "\n";
    write_text((out / "t_star_trace.csv").string(), csv);

    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    const TStarSummary ts = summarize_trace(chain.t_star_trace());
    json report{{"wall_clock_seconds", seconds},
                {"config_digest", job.config_digest},
                {"ci_level", job.sampler.ci_level},
                {"t_star_trace_summary",
                 {{"initial", ts.initial},
                  {"final", ts.final},
                  {"stabilization_iteration", ts.stabilization_iteration}}}};
    write_text((out / "run_report.json").string(), report.dump(2) + "\n");
    log::info("run: chain " + std::to_string(chain_index) + " finished in " +
              std::to_string(seconds) + " s, outputs in " + outdir);
}

}  // namespace

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            int chains) {
    try {
        if (chains < 1) throw ConfigError("run: --chains must be >= 1");
        RunJob job = load_run_config(config_path);
        if (seed_override) job.sampler.seed = *seed_override;

        if (chains == 1) {
            run_one_chain(job, job.outdir, 0);
            return exit_code::ok;
        }
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(chains));
        for (int k = 0; k < chains; ++k) {
            workers.emplace_back([&, k] {
                try {
                    char sub[32];
                    std::snprintf(sub, sizeof(sub), "chain_%02d", k);
                    run_one_chain(job, (fs::path(job.outdir) / sub).string(),
                                  static_cast<std::uint64_t>(k));
                } catch (...) {
                    failures[static_cast<std::size_t>(k)] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& f : failures)
            if (f) std::rethrow_exception(f);
        return exit_code::ok;
    } catch (...) {
        return map_exception_to_exit();
    }
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const std::string& config_path) {
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const EvalJob job = load_eval_config(config_path);
        const Image ref = load_image_file(job.reference);

        json per_image = json::array();
        double psnr_sum = 0.0, ssim_sum = 0.0;
        bool psnr_inf = false;
        json run_digest;     // from the first run-directory estimate, if any
        json trace_summary;  // idem
        for (const auto& est_path : job.estimates) {
            std::string image_path = est_path;
            if (fs::is_directory(est_path)) {
                image_path = (fs::path(est_path) / "mmse_x.npy").string();
                const fs::path manifest = fs::path(est_path) / "checkpoint" / "manifest.json";
                if (run_digest.is_null() && fs::exists(manifest)) {
                    std::ifstream in(manifest);
                    const json m = json::parse(in);
                    if (m.contains("config_digest")) run_digest = m["config_digest"];
                }
                const fs::path report = fs::path(est_path) / "run_report.json";
                if (trace_summary.is_null() && fs::exists(report)) {
                    std::ifstream in(report);
                    const json r = json::parse(in);
                    if (r.contains("t_star_trace_summary"))
                        trace_summary = r["t_star_trace_summary"];
                }
            }
            const Image est = load_image_file(image_path);
            const MetricReport m = evaluate(ref, est, job.peak);
            per_image.push_back(
                {{"path", est_path}, {"psnr", psnr_to_json(m.psnr)}, {"ssim", m.ssim}});
            if (std::isinf(m.psnr))
                psnr_inf = true;
            else
                psnr_sum += m.psnr;
            ssim_sum += m.ssim;
        }
        const double n = static_cast<double>(job.estimates.size());
        json report{{"per_image", per_image},
                    {"mean",
                     {{"psnr", psnr_inf ? json("inf") : json(psnr_sum / n)},
                      {"ssim", ssim_sum / n}}},
                    {"eval_config_digest", job.config_digest},
                    {"run_config_digest", run_digest},
                    {"t_star_trace_summary", trace_summary}};
        const auto t1 = std::chrono::steady_clock::now();
        report["wall_clock_seconds"] = std::chrono::duration<double>(t1 - t0).count();
        write_text(job.report_path, report.dump(2) + "\n");
        std::cout << report["mean"].dump() << "\n";
        return exit_code::ok;
    } catch (...) {
        return map_exception_to_exit();
    }
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

int cmd_schedule(const std::string& config_path, std::optional<double> invert_sigma2) {
    try {
        const ScheduleJob job = load_schedule_config(config_path);
        if (!job.csv_path.empty()) {
            std::string csv = "t,beta,nu,scale\n";
            char line[128];
            for (int t = 0; t <= job.schedule.steps(); ++t) {
                const double beta = t == 0 ? 0.0 : job.schedule.beta(t);
                std::snprintf(line, sizeof(line), "%d,%.12g,%.12g,%.12g\n", t, beta,
                              job.schedule.noise_variance(t), job.schedule.signal_scale(t));
                csv += line;
            }
            write_text(job.csv_path, csv);
            log::info("schedule: wrote " + job.csv_path);
        }
        if (invert_sigma2) {
            if (*invert_sigma2 < 0.0)
                throw ParameterError("schedule: --invert takes a variance >= 0");
            std::cout << job.schedule.invert_noise_variance(*invert_sigma2) << "\n";
        }
        return exit_code::ok;
    } catch (...) {
        return map_exception_to_exit();
    }
}

}  // namespace pnpsgs
