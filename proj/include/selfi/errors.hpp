#pragma once

#include <stdexcept>
#include <string>

namespace selfi {

// Bad run configuration (unknown keys, invalid values). CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad or inconsistent data (file corruption, shape mismatch, degenerate
// splits). CLI exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace selfi
