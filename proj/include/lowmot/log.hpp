#pragma once

namespace lowmot {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Level comes from LOWRATE_MOT_LOG (error|warn|info|debug); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);

void log_error(const char* fmt, ...);
void log_warn(const char* fmt, ...);
void log_info(const char* fmt, ...);
void log_debug(const char* fmt, ...);

}  // namespace lowmot
