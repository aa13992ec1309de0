#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dendrift {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Shapes of matrices/vectors do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A time index moved backwards.
class TimeOrderError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A rejection loop ran out of attempts. Reports the best value seen.
class BudgetExhausted : public Error {
public:
    BudgetExhausted(const std::string& what, double closest)
        : Error(what + " (closest achieved: " + std::to_string(closest) + ")"), closest_(closest) {}

    double closest() const noexcept { return closest_; }

private:
    double closest_;
};

}  // namespace dendrift
