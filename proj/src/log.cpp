#include "lowmot/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace lowmot {

namespace {

LogLevel parse_env_level() {
  const char* env = std::getenv("LOWRATE_MOT_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  if (std::strcmp(env, "error") == 0) return LogLevel::kError;
  if (std::strcmp(env, "warn") == 0) return LogLevel::kWarn;
  if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
  if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
  return LogLevel::kWarn;
}

LogLevel& current_level() {
  static LogLevel level = parse_env_level();
  return level;
}

void vlog(LogLevel level, const char* tag, const char* fmt, va_list args) {
  if (static_cast<int>(level) > static_cast<int>(current_level())) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::vfprintf(stderr, fmt, args);
  std::fputc('\n', stderr);
}

}  // namespace

LogLevel log_level() { return current_level(); }
void set_log_level(LogLevel level) { current_level() = level; }

#define LOWMOT_LOG_IMPL(fn, level, tag)            \
  void fn(const char* fmt, ...) {                  \
    va_list args;                                  \
    va_start(args, fmt);                           \
    vlog(level, tag, fmt, args);                   \
    va_end(args);                                  \
  }

LOWMOT_LOG_IMPL(log_error, LogLevel::kError, "error")
LOWMOT_LOG_IMPL(log_warn, LogLevel::kWarn, "warn")
LOWMOT_LOG_IMPL(log_info, LogLevel::kInfo, "info")
LOWMOT_LOG_IMPL(log_debug, LogLevel::kDebug, "debug")

#undef LOWMOT_LOG_IMPL

}  // namespace lowmot
