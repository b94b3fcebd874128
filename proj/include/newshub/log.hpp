#pragma once

#include <string>

namespace newshub {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Messages go to stderr when at or above the threshold. The initial
// threshold comes from NEWSHUB_LOG (debug|info|warn|error|off), default warn.
void set_log_level(LogLevel level) noexcept;
LogLevel log_level() noexcept;
void log(LogLevel level, const std::string& message);

inline void log_debug(const std::string& m) { log(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log(LogLevel::warn, m); }

}  // namespace newshub
