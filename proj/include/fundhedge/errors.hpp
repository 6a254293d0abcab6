#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fundhedge {

/// Base of every library exception. The message carries the module name as a
/// prefix ("market-model: ...") so that errors surfacing through the CLI stay
/// attributable.
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Argument outside the documented domain (negative times, empty specs, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Lattice weights outside (0,1) or a rate grid that does not align with the
/// time grid.
class StepSizeError : public Error {
public:
    using Error::Error;
};

/// A trading convention whose constraints cannot be met with the supplied
/// accounts.
class ConventionError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration cannot be guaranteed to contract (L*dt >= 1).
class ContractionError : public Error {
public:
    ContractionError(const std::string& module, const std::string& message,
                     std::size_t required_steps)
        : Error(module, message), required_steps_(required_steps) {}

    std::size_t required_steps() const noexcept { return required_steps_; }

private:
    std::size_t required_steps_;
};

/// Fixed-point iteration did not reach tolerance within the iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace fundhedge
