#pragma once

#include <stdexcept>
#include <string>

namespace pnpsgs {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent run configuration (bad JSON, unknown key, bad parameter).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File I/O failure (missing file, unreadable format, write failure).
class IoError : public Error {
public:
    using Error::Error;
};

/// Incompatible tensor/operator shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Out-of-range or otherwise invalid numeric parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Failure inside the Gibbs sweep (solver divergence, singular precision, ...).
class SamplerError : public Error {
public:
    using Error::Error;
};

/// External-denoiser wire protocol violation (bad frame, timeout, dead child).
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Process exit codes used by the CLI commands. Fixed for scripting.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int io = 3;
inline constexpr int sampler = 4;
inline constexpr int protocol = 5;
}  // namespace exit_code

}  // namespace pnpsgs
