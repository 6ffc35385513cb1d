#pragma once

#include <stdexcept>
#include <string>

namespace pmetric {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Four points of a cross-ratio are (numerically) coincident.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A point lies outside the interval on which an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A derivative vanishes where a nonlinearity or Schwarzian is requested.
class CriticalPointError : public Error {
public:
    using Error::Error;
};

/// An iterative inverse or root find did not converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Chained maps do not agree on their shared endpoints.
class CompositionError : public Error {
public:
    using Error::Error;
};

/// The requested combinatorial depth exceeds what was computed or allowed.
class DepthError : public Error {
public:
    using Error::Error;
};

/// A circle map turned out to have a periodic critical orbit.
class RationalRotationError : public Error {
public:
    RationalRotationError(long long p, long long q)
        : Error("rational rotation number " + std::to_string(p) + "/" + std::to_string(q)),
          numerator(p), period(q) {}
    long long numerator;
    long long period;
};

/// Chain construction failed: collision with the critical point or an overlap.
class ChainError : public Error {
public:
    using Error::Error;
};

}  // namespace pmetric
