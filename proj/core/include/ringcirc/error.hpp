#pragma once

#include <stdexcept>
#include <string>

namespace ringcirc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration / physical parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Mass tensor is not symmetric positive definite.
class DegenerateCircuitError : public Error {
public:
    using Error::Error;
};

class EigensolverError : public Error {
public:
    using Error::Error;
};

/// The steady-state Liouvillian has a null space whose dimension is not one.
class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, int null_dimension)
        : Error(what), null_dimension_(null_dimension) {}
    int null_dimension() const noexcept { return null_dimension_; }

private:
    int null_dimension_;
};

} // namespace ringcirc
