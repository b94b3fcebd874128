#include "newshub/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace newshub {

namespace {

LogLevel initial_level() {
  const char* v = std::getenv("NEWSHUB_LOG");
  if (!v) return LogLevel::warn;
  if (!std::strcmp(v, "debug")) return LogLevel::debug;
  if (!std::strcmp(v, "info")) return LogLevel::info;
  if (!std::strcmp(v, "error")) return LogLevel::error;
  if (!std::strcmp(v, "off")) return LogLevel::off;
  return LogLevel::warn;
}

std::atomic<LogLevel>& threshold() {
  static std::atomic<LogLevel> level{initial_level()};
  return level;
}

const char* tag(LogLevel l) {
  switch (l) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    case LogLevel::off: return "";
  }
  return "";
}

}  // namespace

void set_log_level(LogLevel level) noexcept { threshold().store(level); }
LogLevel log_level() noexcept { return threshold().load(); }

void log(LogLevel level, const std::string& message) {
  if (level < threshold().load() || level == LogLevel::off) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::fprintf(stderr, "newshub [%s] %s\n", tag(level), message.c_str());
}

}  // namespace newshub
