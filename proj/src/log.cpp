#include "shadowcg/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace shadowcg {

LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SHADOW_LOG");
    if (!env) return LogLevel::Error;
    const std::string v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

void log_message(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  static std::mutex mu;
  const char* tag = level == LogLevel::Error ? "error" : (level == LogLevel::Info ? "info" : "debug");
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[" << tag << "] " << message << '\n';
}

}  // namespace shadowcg
