#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pnpsgs/denoiser.hpp"

namespace pnpsgs {

/// Child process handle with piped stdin/stdout.
class Subprocess {
public:
    explicit Subprocess(const std::vector<std::string>& argv);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    int stdin_fd() const { return stdin_fd_; }
    int stdout_fd() const { return stdout_fd_; }

private:
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    int pid_ = -1;
};

/// Denoiser backed by an external process speaking the PNPD protocol. One
/// request is in flight at a time; a timeout or malformed frame aborts the
/// chain with a ProtocolError rather than silently substituting.
class ExternalDenoiser final : public DenoiserModel {
public:
    explicit ExternalDenoiser(std::vector<std::string> command, double timeout_seconds = 60.0);

    ReverseMoments reverse_moments(const Image& u_t, int t) const override;
    Image run_reverse(const Image& u_start, int t_start, int t_stop, Rng& rng) const override;
    bool in_process() const override { return false; }

private:
    std::vector<std::string> command_;
    int timeout_ms_;
    mutable std::unique_ptr<Subprocess> child_;
    mutable std::mutex pipe_mutex_;

    void ensure_spawned() const;
};

}  // namespace pnpsgs
