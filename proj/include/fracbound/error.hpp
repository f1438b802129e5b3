#ifndef FRACBOUND_ERROR_HPP
#define FRACBOUND_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracbound {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed expression or configuration text. `offset` is a 0-based byte offset.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// An operation was evaluated outside its mathematical domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation of an expression hit a domain fault; names the offending
/// sub-expression and the input value.
class EvalError : public DomainError {
public:
    using DomainError::DomainError;
};

/// An iterative scheme failed to converge within its budget.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// A required integral is not (numerically) convergent.
class IntegrabilityError : public Error {
public:
    using Error::Error;
};

/// Argument outside Dom(Omega^{-1}).
class OutOfDomainError : public Error {
public:
    using Error::Error;
};

/// The Omega-argument exits Dom(Omega^{-1}) for all t > 0.
class HorizonCollapse : public Error {
public:
    using Error::Error;
};

/// Iterates of the extremal equation exceeded the blow-up threshold.
class BlowUpError : public Error {
public:
    using Error::Error;
};

/// Invalid or incomplete run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace fracbound

#endif
