#pragma once

#include <stdexcept>
#include <string>

namespace hardstop {

/// Malformed configuration or input data files (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Inputs that violate a documented precondition or construction invariant
/// (CLI exit code 3).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Conditions detected during computation that make a result undefined,
/// e.g. unbounded volumes or queries outside tabulated data (CLI exit code 4).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hardstop
