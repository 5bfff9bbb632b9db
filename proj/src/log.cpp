#include "scaffold/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace scaffold {

namespace {

LogLevel parse_level() {
    const char* env = std::getenv("SCAFFOLD_LOG");
    if (!env) return LogLevel::warn;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    if (v == "warn") return LogLevel::warn;
    if (v == "error") return LogLevel::error;
    return LogLevel::warn;
}

const char* level_name(LogLevel level) {
    switch (level) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
    }
    return "info";
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

LogLevel log_level() {
    static const LogLevel level = parse_level();
    return level;
}

void log(LogLevel level, const std::string& message) {
    if (level < log_level()) return;
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << "[" << level_name(level) << "] " << message << "\n";
}

}  // namespace scaffold
