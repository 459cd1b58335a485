#include "stackcast/log.hpp"

#include <cstdlib>
#include <iostream>

namespace stackcast {

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("STACKCAST_LOG");
        if (!env) return LogLevel::info;
        const std::string value = env;
        if (value == "debug") return LogLevel::debug;
        if (value == "info") return LogLevel::info;
        return LogLevel::error;
    }();
    return level;
}

namespace {

void emit(LogLevel at_least, const char* tag, const std::string& message) {
    if (log_level() >= at_least) std::cerr << "[stackcast] " << tag << message << std::endl;
}

} // namespace

void log_error(const std::string& message) { emit(LogLevel::error, "error: ", message); }
void log_info(const std::string& message) { emit(LogLevel::info, "", message); }
void log_debug(const std::string& message) { emit(LogLevel::debug, "debug: ", message); }

} // namespace stackcast
