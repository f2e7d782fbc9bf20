#include "smattn/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace smattn {

namespace {

LogLevel parse_env_level() {
    const char* env = std::getenv("SMATTN_LOG");
    if (!env) return LogLevel::warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
}

LogLevel& current_level() {
    static LogLevel level = parse_env_level();
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

}  // namespace

LogLevel log_level() { return current_level(); }
void set_log_level(LogLevel level) { current_level() = level; }

void log_vat(LogLevel level, const char* fmt, va_list args) {
    if (static_cast<int>(level) > static_cast<int>(current_level())) return;
    std::fprintf(stderr, "[smattn %s] ", level_tag(level));
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}

void log_at(LogLevel level, const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    log_vat(level, fmt, args);
    va_end(args);
}

}  // namespace smattn
