#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pnpsgs/schedule.hpp"
#include "pnpsgs/sgs.hpp"

namespace pnpsgs {

/// Denoiser block of a run configuration.
struct DenoiserSpec {
    enum class Kind { analytic, external };
    enum class PriorMean { constant, file, observed };

    Kind kind = Kind::analytic;
    PriorMean prior_mean = PriorMean::observed;
    double prior_mean_value = 0.0;
    std::string prior_mean_path;
    double tau2 = 0.25;
    std::vector<std::string> command;
    double timeout_seconds = 60.0;
};

/// Fully parsed `run` configuration: the task with its observation loaded,
/// the schedule built, sampler settings resolved, and the canonical config
/// echo + digest for manifests.
struct RunJob {
    TaskSpec task;
    Schedule schedule;
    SamplerConfig sampler;
    DenoiserSpec denoiser;
    std::string outdir;
    std::string config_echo;  // canonical JSON (sorted keys)
    std::string config_digest;
    std::string task_digest;
};

struct DegradeJob {
    enum class Variant { deblur, inpaint, superres };
    Variant variant = Variant::deblur;

    // Kernel source (deblur / superres).
    bool kernel_from_file = false;
    std::string kernel_path;
    int kernel_size = 0;
    double kernel_sigma = 0.0;

    // Noise: scalar sigma, or a per-pixel variance map for deblur.
    bool diagonal_noise = false;
    double sigma = 0.0;
    std::string variance_map_path;

    double masked_fraction = 0.0;  // inpaint
    int factor = 0;                // superres

    std::string input;
    std::string outdir;
    std::uint64_t seed = 0;
    std::string config_echo;
    std::string config_digest;
};

struct EvalJob {
    std::string reference;
    std::vector<std::string> estimates;  // image files or run output directories
    double peak = 1.0;
    std::string report_path;
    std::string config_digest;
};

struct ScheduleJob {
    Schedule schedule;
    std::string csv_path;  // empty: no table written
    std::string config_digest;
};

// Loaders perform strict parsing: any unknown key fails with a ConfigError
// naming the key, before any file is written.
RunJob load_run_config(const std::string& path);
DegradeJob load_degrade_config(const std::string& path);
EvalJob load_eval_config(const std::string& path);
ScheduleJob load_schedule_config(const std::string& path);

/// FNV-1a digest of a canonical (sorted-key) JSON document; stable under
/// field reordering in the source file.
std::string json_digest(const std::string& canonical_json);

/// Image loader dispatching on extension: .png, or .npy with shape (H,W) or
/// (C,H,W).
Image load_image_file(const std::string& path);

/// Measurement loader: .npy with shape (C,M) or (C,H,W) (deblur).
Image load_measurement_npy(const std::string& path, bool full_grid);

/// Dense 0/1 mask grid from .npy shape (H,W).
MaskOperator load_mask_npy(const std::string& path);

/// Kernel taps from .npy shape (kh,kw).
ConvolutionKernel load_kernel_npy(const std::string& path);

}  // namespace pnpsgs
