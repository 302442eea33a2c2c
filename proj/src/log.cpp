#include "fixpoint/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace fixpoint {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FIXPOINT_VI_LOG");
    if (env == nullptr) return LogLevel::error;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::error;
  }();
  return level;
}

bool log_enabled(LogLevel level) {
  return static_cast<int>(level) <= static_cast<int>(log_level());
}

void log_msg(LogLevel level, const std::string& message) {
  if (!log_enabled(level)) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[fixpoint-vi] " << message << "\n";
}

}  // namespace fixpoint
