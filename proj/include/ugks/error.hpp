#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ugks {

/// Bad argument to a library call (wrong size, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Well-formed call whose data violates a physical constraint
/// (negative cross section, negative inflow, non-symmetric kernel, ...).
class InvalidData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejected run configuration. `line` is 0 when the error is not tied to a
/// line of a config file.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what)
        , line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A time step produced non-finite values or an impossible linear system.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::size_t step, double time)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", t = " +
                             std::to_string(time) + ")")
        , step_(step)
        , time_(time) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

}  // namespace ugks
