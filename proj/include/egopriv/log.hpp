#pragma once

#include <string>

namespace egopriv {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Threshold comes from EGOPRIV_LOG (0-3, default 1); messages go to stderr.
LogLevel log_threshold();
void log_message(LogLevel level, const std::string& message);

}  // namespace egopriv
