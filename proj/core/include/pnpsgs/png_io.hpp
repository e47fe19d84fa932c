#pragma once

#include <string>

#include "pnpsgs/image.hpp"

namespace pnpsgs {

/// Reads an 8/16-bit gray or RGB PNG into [0,1] doubles (alpha stripped,
/// palette expanded).
Image read_png(const std::string& path);

/// Writes an 8-bit gray (1 channel) or RGB (3 channels) PNG; values are
/// clamped to [0,1] and quantized. PNG output is for inspection only; NPY is
/// the lossless source of truth.
void write_png(const std::string& path, const Image& img);

}  // namespace pnpsgs
