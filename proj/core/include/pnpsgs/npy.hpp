#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pnpsgs::npy {

/// Tensor loaded from a .npy file, converted to double. Shapes are kept
/// verbatim; data is C-order.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    std::size_t element_count() const;
};

/// Write little-endian float32, C-order, NPY format v1.0 (header padded to a
/// 64-byte boundary). This is the interchange format for images and chains.
void write_f4(const std::string& path, const std::vector<std::size_t>& shape,
              const std::vector<float>& data);

/// Write little-endian int64 (used for mask index files).
void write_i8(const std::string& path, const std::vector<std::size_t>& shape,
              const std::vector<std::int64_t>& data);

/// Read a .npy file with dtype <f4, <f8, <i4 or <i8, C-order.
Tensor read(const std::string& path);

/// Header bytes as write_f4 would produce them (exposed for format tests).
std::vector<std::uint8_t> make_header(const std::string& descr,
                                      const std::vector<std::size_t>& shape);

}  // namespace pnpsgs::npy
