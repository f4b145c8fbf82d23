#pragma once

#include <string_view>

namespace shadowcg {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Threshold read once from SHADOW_LOG (error|info|debug); defaults to error.
LogLevel log_threshold();
void log_message(LogLevel level, std::string_view message);

}  // namespace shadowcg
