#include "pnpsgs/npy.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <numeric>

#include "pnpsgs/errors.hpp"

namespace pnpsgs::npy {

namespace {

constexpr char kMagic[] = "\x93NUMPY";

std::string shape_repr(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += std::to_string(shape[i]);
        if (i + 1 < shape.size()) s += ", ";
    }
    if (shape.size() == 1) s += ",";
    s += ")";
    return s;
}

template <typename T>
void write_raw(const std::string& path, const std::string& descr,
               const std::vector<std::size_t>& shape, const T* data, std::size_t count) {
    std::size_t expected = 1;
    for (std::size_t d : shape) expected *= d;
    if (expected != count) throw ShapeError("npy write: shape does not match element count");

    const auto header = make_header(descr, shape);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("npy write: cannot open " + path);
    out.write(reinterpret_cast<const char*>(header.data()),
              static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
    if (!out) throw IoError("npy write: short write to " + path);
}

}  // namespace

std::size_t Tensor::element_count() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, std::size_t b) { return a * b; });
}

std::vector<std::uint8_t> make_header(const std::string& descr,
                                      const std::vector<std::size_t>& shape) {
    std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " +
                       shape_repr(shape) + ", }";
    // Preamble is 10 bytes (magic 6 + version 2 + header-len 2); pad with
    // spaces so the data section starts on a 64-byte boundary, newline last.
    const std::size_t unpadded = 10 + dict.size() + 1;
    const std::size_t padded = (unpadded + 63) / 64 * 64;
    dict.append(padded - unpadded, ' ');
    dict += '\n';
    if (dict.size() > 0xffff) throw IoError("npy write: header too large for format v1.0");

    std::vector<std::uint8_t> header;
    header.reserve(10 + dict.size());
    header.insert(header.end(), kMagic, kMagic + 6);
    header.push_back(1);
    header.push_back(0);
    const std::uint16_t hlen = static_cast<std::uint16_t>(dict.size());
    header.push_back(static_cast<std::uint8_t>(hlen & 0xff));
    header.push_back(static_cast<std::uint8_t>(hlen >> 8));
    header.insert(header.end(), dict.begin(), dict.end());
    return header;
}

void write_f4(const std::string& path, const std::vector<std::size_t>& shape,
              const std::vector<float>& data) {
    write_raw(path, "<f4", shape, data.data(), data.size());
}

void write_i8(const std::string& path, const std::vector<std::size_t>& shape,
              const std::vector<std::int64_t>& data) {
    write_raw(path, "<i8", shape, data.data(), data.size());
}

namespace {

// Minimal parser for the header dict: finds 'descr', 'fortran_order' and
// 'shape' without pulling in a Python-literal parser.
std::string find_value(const std::string& dict, const std::string& key) {
    const auto kpos = dict.find("'" + key + "'");
    if (kpos == std::string::npos) throw IoError("npy read: header misses key " + key);
    auto pos = dict.find(':', kpos);
    if (pos == std::string::npos) throw IoError("npy read: malformed header");
    ++pos;
    while (pos < dict.size() && dict[pos] == ' ') ++pos;
    std::size_t end = pos;
    int depth = 0;
    while (end < dict.size()) {
        const char ch = dict[end];
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (depth == 0 && (ch == ',' || ch == '}')) break;
        ++end;
    }
    return dict.substr(pos, end - pos);
}

}  // namespace

Tensor read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("npy read: cannot open " + path);

    char magic[6];
    in.read(magic, 6);
    if (!in || std::memcmp(magic, kMagic, 6) != 0)
        throw IoError("npy read: bad magic in " + path);
    unsigned char version[2];
    in.read(reinterpret_cast<char*>(version), 2);
    std::size_t header_len = 0;
    if (version[0] == 1) {
        unsigned char b[2];
        in.read(reinterpret_cast<char*>(b), 2);
        header_len = b[0] | (static_cast<std::size_t>(b[1]) << 8);
    } else if (version[0] == 2 || version[0] == 3) {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        header_len = b[0] | (static_cast<std::size_t>(b[1]) << 8) |
                     (static_cast<std::size_t>(b[2]) << 16) |
                     (static_cast<std::size_t>(b[3]) << 24);
    } else {
        throw IoError("npy read: unsupported format version");
    }
    std::string dict(header_len, '\0');
    in.read(dict.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw IoError("npy read: truncated header in " + path);

    const std::string descr_raw = find_value(dict, "descr");
    std::string descr = descr_raw;
    std::erase(descr, '\'');
    const std::string order = find_value(dict, "fortran_order");
    if (order.find("False") == std::string::npos)
        throw IoError("npy read: fortran-order arrays are not supported");

    Tensor tensor;
    std::string shape_str = find_value(dict, "shape");
    std::size_t pos = 0;
    while (pos < shape_str.size()) {
        if (std::isdigit(static_cast<unsigned char>(shape_str[pos]))) {
            std::size_t end = pos;
            while (end < shape_str.size() && std::isdigit(static_cast<unsigned char>(shape_str[end])))
                ++end;
            tensor.shape.push_back(std::stoull(shape_str.substr(pos, end - pos)));
            pos = end;
        } else {
            ++pos;
        }
    }

    const std::size_t count = tensor.element_count();
    tensor.data.resize(count);
    auto read_as = [&](auto tag) {
        using T = decltype(tag);
        std::vector<T> buf(count);
        in.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(count * sizeof(T)));
        if (!in) throw IoError("npy read: truncated data in " + path);
        for (std::size_t i = 0; i < count; ++i) tensor.data[i] = static_cast<double>(buf[i]);
    };
    if (descr == "<f4")
        read_as(float{});
    else if (descr == "<f8")
        read_as(double{});
    else if (descr == "<i4")
        read_as(std::int32_t{});
    else if (descr == "<i8")
        read_as(std::int64_t{});
    else
        throw IoError("npy read: unsupported dtype " + descr + " in " + path);
    return tensor;
}

}  // namespace pnpsgs::npy
