#include "egopriv/log.hpp"

#include <cstdlib>
#include <iostream>

namespace egopriv {

LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("EGOPRIV_LOG");
    if (!env || !*env) return LogLevel::Warn;
    const int v = std::atoi(env);
    return static_cast<LogLevel>(v < 0 ? 0 : (v > 3 ? 3 : v));
  }();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace egopriv
