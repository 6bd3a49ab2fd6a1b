#include "entropg/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace entropg {

namespace log {

Level threshold() {
    static const Level level = [] {
        const char* env = std::getenv("ENTROPG_LOG");
        if (env == nullptr) return Level::warn;
        const std::string_view v(env);
        if (v == "debug") return Level::debug;
        if (v == "info") return Level::info;
        if (v == "error") return Level::error;
        if (v == "off") return Level::off;
        return Level::warn;
    }();
    return level;
}

void write(Level level, std::string_view message) {
    if (level < threshold()) return;
    static std::mutex mu;
    static constexpr const char* names[] = {"debug", "info", "warn", "error"};
    std::lock_guard lock(mu);
    std::cerr << "[entropg " << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace log

}  // namespace entropg
