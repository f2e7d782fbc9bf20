#pragma once

#include <cstdarg>

namespace smattn {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

// Level comes from the SMATTN_LOG environment variable
// (error|warn|info|debug); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_at(LogLevel level, const char* fmt, ...);

#define SMATTN_LOG_FN(name, lvl)                            \
    inline void name(const char* fmt, ...) {                \
        va_list args;                                       \
        va_start(args, fmt);                                \
        extern void log_vat(LogLevel, const char*, va_list); \
        log_vat(lvl, fmt, args);                            \
        va_end(args);                                       \
    }

SMATTN_LOG_FN(log_error, LogLevel::error)
SMATTN_LOG_FN(log_warn, LogLevel::warn)
SMATTN_LOG_FN(log_info, LogLevel::info)
SMATTN_LOG_FN(log_debug, LogLevel::debug)

#undef SMATTN_LOG_FN

}  // namespace smattn
