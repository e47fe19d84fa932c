#include "pnpsgs/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pnpsgs/errors.hpp"
#include "pnpsgs/npy.hpp"
#include "pnpsgs/png_io.hpp"

namespace pnpsgs {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
}

// Strict schema: every object may contain only the listed keys.
void check_keys(const json& obj, const std::string& context,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("config: " + context + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key))
            throw ConfigError("config: unknown key \"" + key + "\" in " + context);
    }
}

const json& require(const json& obj, const std::string& context, const std::string& key) {
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError("config: missing key \"" + key + "\" in " + context);
    return *it;
}

template <typename T>
T get_as(const json& obj, const std::string& context, const std::string& key) {
    try {
        return require(obj, context, key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: key \"" + key + "\" in " + context + " has the wrong type");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& context, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return get_as<T>(obj, context, key);
}

Schedule parse_schedule(const json& block) {
    check_keys(block, "schedule", {"kind", "steps", "beta_start", "beta_end", "offset"});
    const auto kind = get_as<std::string>(block, "schedule", "kind");
    const int steps = get_as<int>(block, "schedule", "steps");
    if (kind == "linear") {
        return build_linear_schedule(steps,
                                     get_or<double>(block, "schedule", "beta_start", 1e-4),
                                     get_or<double>(block, "schedule", "beta_end", 2e-2));
    }
    if (kind == "cosine") {
        if (block.contains("beta_start") || block.contains("beta_end"))
            throw ConfigError("config: cosine schedule takes \"offset\", not beta endpoints");
        return build_cosine_schedule(steps, get_or<double>(block, "schedule", "offset", 0.008));
    }
    throw ConfigError("config: schedule kind must be \"linear\" or \"cosine\", got \"" + kind +
                      "\"");
}

SamplerConfig parse_sampler(const json& block) {
    check_keys(block, "sampler",
               {"rho", "n_mc", "n_bi", "early_stop", "rescale_input", "t_star_cap", "seed",
                "ci_level", "max_chain_megabytes"});
    SamplerConfig cfg;
    cfg.rho = get_or<double>(block, "sampler", "rho", cfg.rho);
    cfg.n_mc = get_or<int>(block, "sampler", "n_mc", cfg.n_mc);
    cfg.n_bi = get_or<int>(block, "sampler", "n_bi", cfg.n_bi);
    cfg.early_stop = get_or<bool>(block, "sampler", "early_stop", cfg.early_stop);
    cfg.rescale_input = get_or<bool>(block, "sampler", "rescale_input", cfg.rescale_input);
    cfg.t_star_cap = get_or<int>(block, "sampler", "t_star_cap", cfg.t_star_cap);
    cfg.seed = get_or<std::uint64_t>(block, "sampler", "seed", cfg.seed);
    cfg.ci_level = get_or<double>(block, "sampler", "ci_level", cfg.ci_level);
    cfg.max_chain_megabytes =
        get_or<int>(block, "sampler", "max_chain_megabytes", cfg.max_chain_megabytes);
    cfg.validate();
    return cfg;
}

DenoiserSpec parse_denoiser(const json& block) {
    check_keys(block, "denoiser", {"kind", "prior_mean", "tau2", "command", "timeout_seconds"});
    DenoiserSpec spec;
    const auto kind = get_as<std::string>(block, "denoiser", "kind");
    if (kind == "analytic") {
        spec.kind = DenoiserSpec::Kind::analytic;
        spec.tau2 = get_as<double>(block, "denoiser", "tau2");
        if (!(spec.tau2 > 0.0)) throw ConfigError("config: denoiser tau2 must be > 0");
        const json& pm = require(block, "denoiser", "prior_mean");
        check_keys(pm, "denoiser.prior_mean", {"kind", "value", "path"});
        const auto pm_kind = get_as<std::string>(pm, "denoiser.prior_mean", "kind");
        if (pm_kind == "constant") {
            spec.prior_mean = DenoiserSpec::PriorMean::constant;
            spec.prior_mean_value = get_as<double>(pm, "denoiser.prior_mean", "value");
        } else if (pm_kind == "file") {
            spec.prior_mean = DenoiserSpec::PriorMean::file;
            spec.prior_mean_path = get_as<std::string>(pm, "denoiser.prior_mean", "path");
        } else if (pm_kind == "observed") {
            spec.prior_mean = DenoiserSpec::PriorMean::observed;
        } else {
            throw ConfigError("config: prior_mean kind must be constant|file|observed");
        }
        return spec;
    }
    if (kind == "external") {
        spec.kind = DenoiserSpec::Kind::external;
        spec.command = get_as<std::vector<std::string>>(block, "denoiser", "command");
        if (spec.command.empty()) throw ConfigError("config: external denoiser command is empty");
        spec.timeout_seconds =
            get_or<double>(block, "denoiser", "timeout_seconds", spec.timeout_seconds);
        if (!(spec.timeout_seconds > 0.0))
            throw ConfigError("config: denoiser timeout must be > 0");
        return spec;
    }
    throw ConfigError("config: denoiser kind must be \"analytic\" or \"external\"");
}

NoiseModel parse_noise(const json& block) {
    check_keys(block, "task.noise", {"kind", "sigma", "variances"});
    const auto kind = get_as<std::string>(block, "task.noise", "kind");
    if (kind == "scalar") return NoiseModel::scalar(get_as<double>(block, "task.noise", "sigma"));
    if (kind == "diagonal") {
        const auto path = get_as<std::string>(block, "task.noise", "variances");
        const auto tensor = npy::read(path);
        return NoiseModel::diagonal(std::vector<double>(tensor.data.begin(), tensor.data.end()));
    }
    throw ConfigError("config: noise kind must be \"scalar\" or \"diagonal\"");
}

}  // namespace

std::string json_digest(const std::string& canonical_json) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

Image load_image_file(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") return read_png(path);
    const auto tensor = npy::read(path);
    if (tensor.shape.size() == 2) {
        Image img(static_cast<int>(tensor.shape[0]), static_cast<int>(tensor.shape[1]), 1);
        img.data() = tensor.data;
        return img;
    }
    if (tensor.shape.size() == 3) {
        Image img(static_cast<int>(tensor.shape[1]), static_cast<int>(tensor.shape[2]),
                  static_cast<int>(tensor.shape[0]));
        img.data() = tensor.data;
        return img;
    }
    throw IoError("image load: expected 2-D or 3-D tensor in " + path);
}

Image load_measurement_npy(const std::string& path, bool full_grid) {
    const auto tensor = npy::read(path);
    if (full_grid) {
        if (tensor.shape.size() == 3) {
            Image img(static_cast<int>(tensor.shape[1]), static_cast<int>(tensor.shape[2]),
                      static_cast<int>(tensor.shape[0]));
            img.data() = tensor.data;
            return img;
        }
        if (tensor.shape.size() == 2) {
            Image img(static_cast<int>(tensor.shape[0]), static_cast<int>(tensor.shape[1]), 1);
            img.data() = tensor.data;
            return img;
        }
        throw IoError("measurement load: expected (C,H,W) in " + path);
    }
    if (tensor.shape.size() != 2)
        throw IoError("measurement load: expected (C,M) in " + path);
    Image img(1, static_cast<int>(tensor.shape[1]), static_cast<int>(tensor.shape[0]));
    img.data() = tensor.data;
    return img;
}

MaskOperator load_mask_npy(const std::string& path) {
    const auto tensor = npy::read(path);
    if (tensor.shape.size() != 2) throw IoError("mask load: expected dense (H,W) grid in " + path);
    const int h = static_cast<int>(tensor.shape[0]);
    const int w = static_cast<int>(tensor.shape[1]);
    std::vector<std::int64_t> kept;
    for (std::size_t i = 0; i < tensor.data.size(); ++i)
        if (tensor.data[i] != 0.0) kept.push_back(static_cast<std::int64_t>(i));
    return MaskOperator(std::move(kept), h, w);
}

ConvolutionKernel load_kernel_npy(const std::string& path) {
    const auto tensor = npy::read(path);
    if (tensor.shape.size() != 2) throw IoError("kernel load: expected (kh,kw) in " + path);
    ConvolutionKernel k;
    k.height = static_cast<int>(tensor.shape[0]);
    k.width = static_cast<int>(tensor.shape[1]);
    k.taps = tensor.data;
    return k;
}

RunJob load_run_config(const std::string& path) {
    const json root = parse_file(path);
    check_keys(root, "run config", {"task", "schedule", "sampler", "denoiser", "io"});

    RunJob job;
    job.config_echo = root.dump();
    job.config_digest = json_digest(job.config_echo);

    const json& task = require(root, "run config", "task");
    const auto variant = get_as<std::string>(task, "task", "variant");
    if (variant == "deblur") {
        check_keys(task, "task", {"variant", "y", "kernel", "noise"});
        const Image y = load_measurement_npy(get_as<std::string>(task, "task", "y"), true);
        const auto kernel = load_kernel_npy(get_as<std::string>(task, "task", "kernel"));
        DeblurTask t{CirculantOperator(kernel, y.height(), y.width()),
                     parse_noise(require(task, "task", "noise"))};
        job.task = TaskSpec{std::move(t), y};
    } else if (variant == "inpaint") {
        check_keys(task, "task", {"variant", "y", "mask", "sigma"});
        MaskOperator mask = load_mask_npy(get_as<std::string>(task, "task", "mask"));
        const Image y = load_measurement_npy(get_as<std::string>(task, "task", "y"), false);
        InpaintTask t{std::move(mask), get_as<double>(task, "task", "sigma")};
        job.task = TaskSpec{std::move(t), y};
    } else if (variant == "superres") {
        check_keys(task, "task",
                   {"variant", "y", "kernel", "mask", "sigma", "rho1", "rho2", "ridge"});
        MaskOperator mask = load_mask_npy(get_as<std::string>(task, "task", "mask"));
        const auto kernel = load_kernel_npy(get_as<std::string>(task, "task", "kernel"));
        const Image y = load_measurement_npy(get_as<std::string>(task, "task", "y"), false);
        SuperResTask t{CirculantOperator(kernel, mask.height(), mask.width()),
                       std::move(mask),
                       get_as<double>(task, "task", "sigma"),
                       get_as<double>(task, "task", "rho1"),
                       get_as<double>(task, "task", "rho2"),
                       std::nullopt};
        if (task.contains("ridge")) t.ridge = get_as<double>(task, "task", "ridge");
        job.task = TaskSpec{std::move(t), y};
    } else {
        throw ConfigError("config: task variant must be deblur|inpaint|superres");
    }
    job.task_digest = json_digest(task.dump());

    job.schedule = parse_schedule(require(root, "run config", "schedule"));
    job.sampler = root.contains("sampler") ? parse_sampler(root["sampler"]) : SamplerConfig{};
    job.denoiser = parse_denoiser(require(root, "run config", "denoiser"));

    const json& io = require(root, "run config", "io");
    check_keys(io, "io", {"outdir"});
    job.outdir = get_as<std::string>(io, "io", "outdir");
    return job;
}

DegradeJob load_degrade_config(const std::string& path) {
    const json root = parse_file(path);
    check_keys(root, "degrade config", {"task", "io", "seed"});

    DegradeJob job;
    job.config_echo = root.dump();
    job.config_digest = json_digest(job.config_echo);
    job.seed = get_or<std::uint64_t>(root, "degrade config", "seed", 0);

    const json& task = require(root, "degrade config", "task");
    const auto variant = get_as<std::string>(task, "task", "variant");

    auto parse_kernel_block = [&](const json& kb) {
        check_keys(kb, "task.kernel", {"kind", "size", "sigma", "path"});
        const auto kind = get_as<std::string>(kb, "task.kernel", "kind");
        if (kind == "gaussian") {
            job.kernel_from_file = false;
            job.kernel_size = get_as<int>(kb, "task.kernel", "size");
            job.kernel_sigma = get_as<double>(kb, "task.kernel", "sigma");
        } else if (kind == "file") {
            job.kernel_from_file = true;
            job.kernel_path = get_as<std::string>(kb, "task.kernel", "path");
        } else {
            throw ConfigError("config: kernel kind must be \"gaussian\" or \"file\"");
        }
    };

    if (variant == "deblur") {
        job.variant = DegradeJob::Variant::deblur;
        check_keys(task, "task", {"variant", "kernel", "noise"});
        parse_kernel_block(require(task, "task", "kernel"));
        const json& noise = require(task, "task", "noise");
        check_keys(noise, "task.noise", {"kind", "sigma", "variances"});
        const auto nk = get_as<std::string>(noise, "task.noise", "kind");
        if (nk == "scalar") {
            job.diagonal_noise = false;
            job.sigma = get_as<double>(noise, "task.noise", "sigma");
        } else if (nk == "diagonal") {
            job.diagonal_noise = true;
            job.variance_map_path = get_as<std::string>(noise, "task.noise", "variances");
        } else {
            throw ConfigError("config: noise kind must be scalar|diagonal");
        }
    } else if (variant == "inpaint") {
        job.variant = DegradeJob::Variant::inpaint;
        check_keys(task, "task", {"variant", "masked_fraction", "sigma"});
        job.masked_fraction = get_as<double>(task, "task", "masked_fraction");
        job.sigma = get_as<double>(task, "task", "sigma");
    } else if (variant == "superres") {
        job.variant = DegradeJob::Variant::superres;
        check_keys(task, "task", {"variant", "factor", "kernel", "sigma"});
        job.factor = get_as<int>(task, "task", "factor");
        parse_kernel_block(require(task, "task", "kernel"));
        job.sigma = get_as<double>(task, "task", "sigma");
    } else {
        throw ConfigError("config: task variant must be deblur|inpaint|superres");
    }

    const json& io = require(root, "degrade config", "io");
    check_keys(io, "io", {"input", "outdir"});
    job.input = get_as<std::string>(io, "io", "input");
    job.outdir = get_as<std::string>(io, "io", "outdir");
    if (job.input == job.outdir)
        throw ConfigError("config: io.input and io.outdir must be distinct paths");
    return job;
}

EvalJob load_eval_config(const std::string& path) {
    const json root = parse_file(path);
    check_keys(root, "eval config", {"reference", "estimate", "estimates", "peak", "report"});
    EvalJob job;
    job.config_digest = json_digest(root.dump());
    job.reference = get_as<std::string>(root, "eval config", "reference");
    if (root.contains("estimate") == root.contains("estimates"))
        throw ConfigError("config: provide exactly one of \"estimate\" or \"estimates\"");
    if (root.contains("estimate"))
        job.estimates.push_back(get_as<std::string>(root, "eval config", "estimate"));
    else
        job.estimates = get_as<std::vector<std::string>>(root, "eval config", "estimates");
    if (job.estimates.empty()) throw ConfigError("config: estimates list is empty");
    job.peak = get_or<double>(root, "eval config", "peak", 1.0);
    job.report_path = get_as<std::string>(root, "eval config", "report");
    if (job.report_path == job.reference)
        throw ConfigError("config: report path must differ from the reference path");
    for (const auto& e : job.estimates)
        if (job.report_path == e)
            throw ConfigError("config: report path must differ from estimate paths");
    return job;
}

ScheduleJob load_schedule_config(const std::string& path) {
    const json root = parse_file(path);
    check_keys(root, "schedule config", {"schedule", "io"});
    ScheduleJob job;
    job.config_digest = json_digest(root.dump());
    job.schedule = parse_schedule(require(root, "schedule config", "schedule"));
    if (root.contains("io")) {
        const json& io = root["io"];
        check_keys(io, "io", {"csv"});
        job.csv_path = get_or<std::string>(io, "io", "csv", "");
    }
    return job;
}

}  // namespace pnpsgs
