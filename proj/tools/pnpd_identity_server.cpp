// Reference PNPD denoising server: echoes the payload unchanged (zero reverse
// steps). Doubles as the failure injector for protocol tests.

#include <unistd.h>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "pnpsgs/errors.hpp"
#include "pnpsgs/pnpd.hpp"

using namespace pnpsgs;

int main(int argc, char** argv) {
    CLI::App app{"PNPD identity denoising server (reads frames on stdin, replies on stdout)"};
    bool corrupt_magic = false;
    bool truncate = false;
    int sleep_ms = 0;
    std::string respond_error;
    app.add_flag("--corrupt-magic", corrupt_magic, "reply with broken magic bytes");
    app.add_flag("--truncate", truncate, "reply with half a frame and exit");
    app.add_option("--sleep-ms", sleep_ms, "delay before each reply");
    app.add_option("--respond-error", respond_error, "reply with a protocol error frame");
    CLI11_PARSE(app, argc, argv);

    try {
        for (;;) {
            auto request = pnpd::read_request_fd(STDIN_FILENO, -1);
            if (!request) break;  // clean EOF: client is done
            if (sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));

            std::vector<std::uint8_t> frame;
            if (!respond_error.empty()) {
                frame = pnpd::encode_error(respond_error);
            } else {
                frame = pnpd::encode_ok(request->channels, request->height, request->width,
                                        request->payload);
                if (corrupt_magic) {
                    frame[0] = 'X';
                    frame[1] = 'X';
                }
                if (truncate) frame.resize(frame.size() / 2);
            }
            pnpd::write_all_fd(STDOUT_FILENO, frame.data(), frame.size(), -1);
            if (truncate) return 0;
        }
    } catch (const Error& e) {
        std::cerr << "pnpd-identity-server: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
