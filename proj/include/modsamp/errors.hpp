#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modsamp {

/// An argument or configuration value violates a precondition.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File or word content that cannot be interpreted. Carries the 1-based line
/// number when the error is tied to a text line (0 otherwise).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A requested size does not fit the index type.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Cross-correlation alignment is undefined for the given inputs.
class AlignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace modsamp
