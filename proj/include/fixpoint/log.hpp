#pragma once

#include <string>

namespace fixpoint {

/// Verbosity levels selected through the FIXPOINT_VI_LOG environment
/// variable: "error" (default), "info", or "debug".
enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level();
bool log_enabled(LogLevel level);
void log_msg(LogLevel level, const std::string& message);

}  // namespace fixpoint
