#pragma once

#include <atomic>
#include <iostream>
#include <string>

namespace fluentnet {

enum class LogLevel { quiet = 0, warning = 1, info = 2 };

inline std::atomic<int>& log_level_storage() {
  static std::atomic<int> level{static_cast<int>(LogLevel::warning)};
  return level;
}

inline void set_log_level(LogLevel level) { log_level_storage() = static_cast<int>(level); }

inline void log_warning(const std::string& message) {
  if (log_level_storage() >= static_cast<int>(LogLevel::warning)) std::cerr << "warning: " << message << '\n';
}

inline void log_info(const std::string& message) {
  if (log_level_storage() >= static_cast<int>(LogLevel::info)) std::cerr << message << '\n';
}

}  // namespace fluentnet
