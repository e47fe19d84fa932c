#include "pnpsgs/external_denoiser.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include "pnpsgs/errors.hpp"
#include "pnpsgs/pnpd.hpp"

namespace pnpsgs {

Subprocess::Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw ProtocolError("subprocess: empty command line");
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw ProtocolError(std::string("subprocess: pipe failed: ") + strerror(errno));

    const pid_t pid = fork();
    if (pid < 0) throw ProtocolError(std::string("subprocess: fork failed: ") + strerror(errno));
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        // Only reached when exec fails; the parent sees EOF and raises.
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
    pid_ = pid;
}

Subprocess::~Subprocess() {
    if (stdin_fd_ >= 0) close(stdin_fd_);
    if (stdout_fd_ >= 0) close(stdout_fd_);
    if (pid_ > 0) {
        int status = 0;
        // Closing stdin asks a well-behaved server to exit; escalate if not.
        if (waitpid(pid_, &status, WNOHANG) == 0) {
            kill(pid_, SIGTERM);
            for (int i = 0; i < 50 && waitpid(pid_, &status, WNOHANG) == 0; ++i) usleep(10000);
            if (waitpid(pid_, &status, WNOHANG) == 0) {
                kill(pid_, SIGKILL);
                waitpid(pid_, &status, 0);
            }
        }
    }
}

ExternalDenoiser::ExternalDenoiser(std::vector<std::string> command, double timeout_seconds)
    : command_(std::move(command)),
      timeout_ms_(static_cast<int>(std::lround(timeout_seconds * 1000.0))) {
    if (command_.empty()) throw ProtocolError("external denoiser: empty command line");
    if (timeout_ms_ <= 0) throw ParameterError("external denoiser: timeout must be positive");
}

void ExternalDenoiser::ensure_spawned() const {
    if (!child_) child_ = std::make_unique<Subprocess>(command_);
}

ReverseMoments ExternalDenoiser::reverse_moments(const Image&, int) const {
    throw Error("external denoiser: per-step moments are not exposed by the PNPD protocol");
}

Image ExternalDenoiser::run_reverse(const Image& u_start, int t_start, int t_stop, Rng&) const {
    if (t_stop < 0 || t_stop > t_start)
        throw ParameterError("run_reverse: require 0 <= t_stop <= t_start");

    std::lock_guard<std::mutex> lock(pipe_mutex_);
    ensure_spawned();

    pnpd::Request req;
    req.t_start = static_cast<std::uint32_t>(t_start);
    req.t_stop = static_cast<std::uint32_t>(t_stop);
    req.channels = static_cast<std::uint32_t>(u_start.channels());
    req.height = static_cast<std::uint32_t>(u_start.height());
    req.width = static_cast<std::uint32_t>(u_start.width());
    req.payload.resize(u_start.size());
    for (std::size_t i = 0; i < u_start.size(); ++i)
        req.payload[i] = static_cast<float>(u_start.data()[i]);

    const auto frame = pnpd::encode_request(req);
    pnpd::write_all_fd(child_->stdin_fd(), frame.data(), frame.size(), timeout_ms_);
    const pnpd::Response resp = pnpd::read_response_fd(child_->stdout_fd(), timeout_ms_);
    if (!resp.ok)
        throw ProtocolError("external denoiser reported: " + resp.error_message);
    if (resp.channels != req.channels || resp.height != req.height || resp.width != req.width)
        throw ProtocolError("external denoiser returned mismatched dims");

    Image out(u_start.height(), u_start.width(), u_start.channels());
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] = static_cast<double>(resp.payload[i]);
    return out;
}

}  // namespace pnpsgs
