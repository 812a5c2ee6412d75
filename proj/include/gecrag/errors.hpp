#pragma once

#include <stdexcept>
#include <string>

namespace gecrag {

// Malformed configuration detected at load time (never at use time).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data violates a documented contract (bad manifest, duplicate id, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / format failures on artifacts (missing files, bad magic, checksum).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Remote generation failed after all retries.
class GenerationError : public std::runtime_error {
public:
    explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gecrag
