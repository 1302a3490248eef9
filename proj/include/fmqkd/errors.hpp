#pragma once

#include <stdexcept>
#include <string>

namespace fmqkd {

// Invalid configuration or parameter set.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or malformed input data (files, streams, estimation windows).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fmqkd
