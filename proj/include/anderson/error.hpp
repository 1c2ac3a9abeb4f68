#pragma once

#include <stdexcept>
#include <string>

namespace anderson {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition or parameter-domain violation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A dense solve was requested for an operator above the configured size cap.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// An iterative method (eigensolver, integrator, quadrature, root finder)
/// exhausted its budget. `achieved` carries the best error estimate reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}

    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace anderson
