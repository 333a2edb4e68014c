#include "axiseg/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace axiseg {

namespace {

LogLevel parse_level(const char* s) {
    if (!s) return LogLevel::warn;
    const std::string v(s);
    if (v == "error") return LogLevel::error;
    if (v == "warn") return LogLevel::warn;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

std::atomic<LogLevel>& level_storage() {
    static std::atomic<LogLevel> level{parse_level(std::getenv("AXISEG_LOG"))};
    return level;
}

const char* level_tag(LogLevel l) {
    switch (l) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
    }
    return "?";
}

} // namespace

LogLevel log_level() { return level_storage().load(); }

void set_log_level(LogLevel level) { level_storage().store(level); }

void log(LogLevel level, const std::string& message) {
    if (level > log_level()) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "axiseg [" << level_tag(level) << "] " << message << "\n";
}

} // namespace axiseg
