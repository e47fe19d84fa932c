#include "pnpsgs/pnpd.hpp"

#include <poll.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "pnpsgs/errors.hpp"

namespace pnpsgs::pnpd {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, const std::vector<float>& payload) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(payload.data());
    out.insert(out.end(), bytes, bytes + payload.size() * sizeof(float));
}

// Reads exactly `size` bytes. first_byte_optional allows a clean EOF before
// the first byte (server idle loop); EOF anywhere else is a protocol error.
bool read_exact_fd(int fd, std::uint8_t* dst, std::size_t size, int timeout_ms,
                   bool first_byte_optional) {
    std::size_t done = 0;
    while (done < size) {
        if (timeout_ms > 0) {
            pollfd pfd{fd, POLLIN, 0};
            const int pr = poll(&pfd, 1, timeout_ms);
            if (pr == 0)
                throw ProtocolError("pnpd: timed out after " + std::to_string(timeout_ms) +
                                    " ms waiting for the peer");
            if (pr < 0) throw ProtocolError(std::string("pnpd: poll failed: ") + strerror(errno));
        }
        const ssize_t n = ::read(fd, dst + done, size - done);
        if (n == 0) {
            if (done == 0 && first_byte_optional) return false;
            throw ProtocolError("pnpd: peer closed the pipe mid-frame");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("pnpd: read failed: ") + strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
    return true;
}

std::uint32_t read_u32(int fd, int timeout_ms) {
    std::uint8_t buf[4];
    read_exact_fd(fd, buf, 4, timeout_ms, false);
    return get_u32(buf);
}

void read_magic_and_version(int fd, int timeout_ms) {
    std::uint8_t magic[4];
    read_exact_fd(fd, magic, 4, timeout_ms, false);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ProtocolError("pnpd: bad magic bytes in frame header");
    const std::uint32_t version = read_u32(fd, timeout_ms);
    if (version != kVersion)
        throw ProtocolError("pnpd: unsupported protocol version " + std::to_string(version));
}

std::vector<float> read_payload(int fd, std::size_t count, int timeout_ms) {
    std::vector<float> payload(count);
    read_exact_fd(fd, reinterpret_cast<std::uint8_t*>(payload.data()), count * sizeof(float),
                  timeout_ms, false);
    return payload;
}

constexpr std::size_t kMaxElements = std::size_t{1} << 28;  // 1 GiB of float32

std::size_t checked_count(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
    const std::size_t count = static_cast<std::size_t>(c) * h * w;
    if (count == 0 || count > kMaxElements)
        throw ProtocolError("pnpd: implausible tensor dims " + std::to_string(c) + "x" +
                            std::to_string(h) + "x" + std::to_string(w));
    return count;
}

}  // namespace

std::vector<std::uint8_t> encode_request(const Request& req) {
    std::vector<std::uint8_t> out;
    out.reserve(9 * 4 + req.payload.size() * sizeof(float));
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    put_u32(out, kMsgRequest);
    put_u32(out, req.t_start);
    put_u32(out, req.t_stop);
    put_u32(out, 3);
    put_u32(out, req.channels);
    put_u32(out, req.height);
    put_u32(out, req.width);
    put_f32(out, req.payload);
    return out;
}

std::vector<std::uint8_t> encode_ok(std::uint32_t channels, std::uint32_t height,
                                    std::uint32_t width, const std::vector<float>& payload) {
    std::vector<std::uint8_t> out;
    out.reserve(7 * 4 + payload.size() * sizeof(float));
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    put_u32(out, kMsgOk);
    put_u32(out, 3);
    put_u32(out, channels);
    put_u32(out, height);
    put_u32(out, width);
    put_f32(out, payload);
    return out;
}

std::vector<std::uint8_t> encode_error(const std::string& message) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    put_u32(out, kMsgError);
    put_u32(out, static_cast<std::uint32_t>(message.size()));
    out.insert(out.end(), message.begin(), message.end());
    return out;
}

std::optional<Request> read_request_fd(int fd, int timeout_ms) {
    std::uint8_t magic[4];
    if (!read_exact_fd(fd, magic, 4, timeout_ms, true)) return std::nullopt;
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ProtocolError("pnpd: bad magic bytes in request");
    const std::uint32_t version = read_u32(fd, timeout_ms);
    if (version != kVersion)
        throw ProtocolError("pnpd: unsupported protocol version " + std::to_string(version));
    const std::uint32_t msg_type = read_u32(fd, timeout_ms);
    if (msg_type != kMsgRequest)
        throw ProtocolError("pnpd: expected request frame, got msg_type " +
                            std::to_string(msg_type));
    Request req;
    req.t_start = read_u32(fd, timeout_ms);
    req.t_stop = read_u32(fd, timeout_ms);
    const std::uint32_t ndim = read_u32(fd, timeout_ms);
    if (ndim != 3) throw ProtocolError("pnpd: expected ndim 3, got " + std::to_string(ndim));
    req.channels = read_u32(fd, timeout_ms);
    req.height = read_u32(fd, timeout_ms);
    req.width = read_u32(fd, timeout_ms);
    req.payload = read_payload(fd, checked_count(req.channels, req.height, req.width), timeout_ms);
    return req;
}

Response read_response_fd(int fd, int timeout_ms) {
    read_magic_and_version(fd, timeout_ms);
    const std::uint32_t msg_type = read_u32(fd, timeout_ms);
    Response resp;
    if (msg_type == kMsgOk) {
        const std::uint32_t ndim = read_u32(fd, timeout_ms);
        if (ndim != 3) throw ProtocolError("pnpd: expected ndim 3 in response");
        resp.ok = true;
        resp.channels = read_u32(fd, timeout_ms);
        resp.height = read_u32(fd, timeout_ms);
        resp.width = read_u32(fd, timeout_ms);
        resp.payload =
            read_payload(fd, checked_count(resp.channels, resp.height, resp.width), timeout_ms);
        return resp;
    }
    if (msg_type == kMsgError) {
        const std::uint32_t len = read_u32(fd, timeout_ms);
        if (len > (1u << 20)) throw ProtocolError("pnpd: implausible error-message length");
        std::string msg(len, '\0');
        read_exact_fd(fd, reinterpret_cast<std::uint8_t*>(msg.data()), len, timeout_ms, false);
        resp.ok = false;
        resp.error_message = msg;
        return resp;
    }
    throw ProtocolError("pnpd: unknown response msg_type " + std::to_string(msg_type));
}

void write_all_fd(int fd, const std::uint8_t* data, std::size_t size, int timeout_ms) {
    std::size_t done = 0;
    while (done < size) {
        if (timeout_ms > 0) {
            pollfd pfd{fd, POLLOUT, 0};
            const int pr = poll(&pfd, 1, timeout_ms);
            if (pr == 0) throw ProtocolError("pnpd: timed out writing to the peer");
            if (pr < 0) throw ProtocolError(std::string("pnpd: poll failed: ") + strerror(errno));
        }
        const ssize_t n = ::write(fd, data + done, size - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("pnpd: write failed: ") + strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

}  // namespace pnpsgs::pnpd
