#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "pnpsgs/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"PnP split Gibbs sampler for linear-Gaussian imaging inverse problems"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    int chains = 1;
    std::optional<double> invert_sigma2;

    auto* degrade = app.add_subcommand("degrade", "synthesize a degraded observation y = Hx + n");
    degrade->add_option("--config", config_path, "JSON configuration")->required();
    degrade->add_option("--seed", seed, "override the config seed");

    auto* run = app.add_subcommand("run", "run the sampler and write chain + summaries");
    run->add_option("--config", config_path, "JSON configuration")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--chains", chains, "number of independently seeded chains")
        ->check(CLI::PositiveNumber);

    auto* eval = app.add_subcommand("eval", "PSNR/SSIM report against a reference image");
    eval->add_option("--config", config_path, "JSON configuration")->required();

    auto* schedule = app.add_subcommand("schedule", "dump the noise-variance table as CSV");
    schedule->add_option("--config", config_path, "JSON configuration")->required();
    schedule->add_option("--invert", invert_sigma2,
                         "print the step index t* whose nu(t) is closest to this variance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (degrade->parsed()) return pnpsgs::cmd_degrade(config_path, seed);
    if (run->parsed()) return pnpsgs::cmd_run(config_path, seed, chains);
    if (eval->parsed()) return pnpsgs::cmd_eval(config_path);
    return pnpsgs::cmd_schedule(config_path, invert_sigma2);
}
