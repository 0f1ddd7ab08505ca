#pragma once

#include <string_view>

namespace metaprobe {

enum class LogLevel { Debug, Info, Warn, Error, Quiet };

void set_log_level(LogLevel level);
/// Writes one line to standard error when `level` is enabled.
void log(LogLevel level, std::string_view message);

}  // namespace metaprobe
