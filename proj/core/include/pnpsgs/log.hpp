#pragma once

#include <string>

namespace pnpsgs::log {

// Verbosity from the PNP_SGS_LOG environment variable:
// "quiet" (or "0"), "info" (default), "debug".
enum class Level { quiet = 0, info = 1, debug = 2 };

Level level();

void info(const std::string& message);
void debug(const std::string& message);

}  // namespace pnpsgs::log
