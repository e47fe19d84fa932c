#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pnpsgs::pnpd {

// PNPD wire protocol v1, little-endian, over a child process's stdin/stdout.
//
// Request:  "PNPD" | version u32 = 1 | msg_type u32 = 1 | t_start u32 |
//           t_stop u32 | ndim u32 = 3 | dims 3 x u32 (C, H, W) |
//           payload C*H*W float32
// Response: "PNPD" | version u32 | msg_type u32 = 2 | ndim u32 = 3 |
//           dims 3 x u32 | payload float32              (ok)
//           "PNPD" | version u32 | msg_type u32 = 3 | err_len u32 |
//           err_len bytes UTF-8                          (error)
//
// The server performs its own reverse diffusion from t_start down to t_stop;
// the client treats one exchange as a whole run_reverse call.

inline constexpr char kMagic[4] = {'P', 'N', 'P', 'D'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kMsgRequest = 1;
inline constexpr std::uint32_t kMsgOk = 2;
inline constexpr std::uint32_t kMsgError = 3;

struct Request {
    std::uint32_t t_start = 0;
    std::uint32_t t_stop = 0;
    std::uint32_t channels = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<float> payload;
};

struct Response {
    bool ok = false;
    std::uint32_t channels = 0;
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<float> payload;   // ok responses
    std::string error_message;    // error responses
};

std::vector<std::uint8_t> encode_request(const Request& req);
std::vector<std::uint8_t> encode_ok(std::uint32_t channels, std::uint32_t height,
                                    std::uint32_t width, const std::vector<float>& payload);
std::vector<std::uint8_t> encode_error(const std::string& message);

/// Blocking frame reads on a file descriptor. A timeout of <= 0 waits
/// forever. Throws ProtocolError on malformed frames, timeouts, or EOF in the
/// middle of a frame; returns nullopt on clean EOF before any byte.
std::optional<Request> read_request_fd(int fd, int timeout_ms);
Response read_response_fd(int fd, int timeout_ms);

/// Writes all bytes; throws ProtocolError on failure or timeout.
void write_all_fd(int fd, const std::uint8_t* data, std::size_t size, int timeout_ms);

}  // namespace pnpsgs::pnpd
