#pragma once

#include <stdexcept>
#include <string>

namespace pec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the requested map
/// (A(u) = 0 for lambda_of, b <= 0 for the extremal pairs, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The branch root does not exist on this ray for this energy level.
class InfeasibleRayError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Invalid user configuration (exponent ordering, grid sizes, expressions).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite values, root finder or optimizer failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace pec
