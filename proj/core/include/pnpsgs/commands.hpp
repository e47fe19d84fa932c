#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pnpsgs {

// CLI entry points. Each returns a process exit status:
//   0 ok, 2 config error, 3 I/O error, 4 sampler error, 5 protocol error.
// Diagnostics go to stderr.

/// Synthesizes a degraded observation y = H x + n and writes the measurement,
/// operator artifacts and a manifest into the configured output directory.
int cmd_degrade(const std::string& config_path, std::optional<std::uint64_t> seed_override);

/// Runs the sampler and writes the chain checkpoint, posterior summary images
/// and the t* trace. `chains` > 1 runs that many independently seeded chains
/// concurrently, each into its own subdirectory.
int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_override,
            int chains);

/// Computes PSNR/SSIM of estimates against a reference and writes a JSON
/// report.
int cmd_eval(const std::string& config_path);

/// Dumps the schedule table as CSV (columns t,beta,nu,scale) and optionally
/// inverts a noise variance to its step index.
int cmd_schedule(const std::string& config_path, std::optional<double> invert_sigma2);

}  // namespace pnpsgs
