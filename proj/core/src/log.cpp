#include "pnpsgs/log.hpp"

#include <cstdlib>
#include <iostream>

namespace pnpsgs::log {

Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("PNP_SGS_LOG");
        if (!env) return Level::info;
        const std::string v(env);
        if (v == "quiet" || v == "0") return Level::quiet;
        if (v == "debug" || v == "2") return Level::debug;
        return Level::info;
    }();
    return lvl;
}

void info(const std::string& message) {
    if (level() >= Level::info) std::cerr << "[pnp-sgs] " << message << "\n";
}

void debug(const std::string& message) {
    if (level() >= Level::debug) std::cerr << "[pnp-sgs:debug] " << message << "\n";
}

}  // namespace pnpsgs::log
