#pragma once

#include <stdexcept>
#include <string>

namespace rdlab {

/// Invalid argument to an operation (bad interval, overlapping plateaus, ...).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (non-finite values).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A numerical procedure failed: blow-up, Newton non-convergence, ...
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The nonlinearity is degenerate on the requested range (e.g. f identically zero).
struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Experiment configuration could not be validated. `field` names the offending entry.
struct ConfigError : std::runtime_error {
    ConfigError(std::string field_name, const std::string& what)
        : std::runtime_error(field_name + ": " + what), field(std::move(field_name)) {}
    std::string field;
};

}  // namespace rdlab
