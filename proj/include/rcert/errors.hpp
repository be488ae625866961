#pragma once

#include <stdexcept>
#include <string>

namespace rcert {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient field or time function produced a non-finite value.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double t, double w, double value)
        : Error(what), t_(t), w_(w), value_(value) {}

    double t() const noexcept { return t_; }
    double w() const noexcept { return w_; }
    double value() const noexcept { return value_; }

private:
    double t_;
    double w_;
    double value_;
};

/// An argument lies outside the domain where an operation is defined
/// (non-positive p0, excluded parameter branch, negative probe integrand ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A quantity overflowed the representable range (e.g. the exponent of F).
class RangeError : public Error {
public:
    using Error::Error;
};

/// An adaptive procedure ran out of budget before meeting its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration. The message starts with the path of the field.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rcert
