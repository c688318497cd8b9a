#pragma once

#include <stdexcept>
#include <string>

namespace jsde {

// Precondition or argument violations (bad band, bad step, n_max = 0, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An integral or rate that is numerically infinite (exceeds the overflow guard
// or fails to settle).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed configuration; `pointer()` is a JSON pointer to the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& what)
        : std::runtime_error("config error at " + (pointer.empty() ? std::string("/") : pointer) +
                             ": " + what),
          pointer_(std::move(pointer)),
          message_(what) {}

    const std::string& pointer() const noexcept { return pointer_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string pointer_;
    std::string message_;
};

// Numerical procedure failed to produce a result (root not bracketed, taper
// shrink exhausted, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace jsde
