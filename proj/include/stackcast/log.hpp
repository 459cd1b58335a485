#pragma once

#include <string>

namespace stackcast {

// Verbosity comes from the STACKCAST_LOG environment variable
// (error | info | debug); everything goes to standard error.
enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level();

void log_error(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

} // namespace stackcast
