#pragma once

#include <stdexcept>
#include <string>

namespace mzlab {

/// Violated precondition on a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A quadrature could not reach its accuracy target within the node budget.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A field's frequency content does not fit the requested operation.
class BandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.  `key` is the dotted
/// path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& msg)
        : std::runtime_error(key + ": " + msg), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace mzlab
