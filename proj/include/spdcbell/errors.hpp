#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdcbell {

/// Base of every error thrown by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the physical or tabulated domain (wavelength range, mode-point guards).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent setup or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number of the offending row.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Data that parsed fine but violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The least-squares problem is degenerate (singular normal matrix).
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace spdcbell
