#pragma once

#include <stdexcept>
#include <string>

namespace fairsplit {

/// Base class for all toolkit errors. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input data violates a contract (bad manifest, mismatched predictions, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// An argument is outside the operation's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A metric has no defined value for the given input (e.g. fewer than two subgroups).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// The partitioning instance cannot be solved (e.g. fewer than three subject groups).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// A guarded operation refused to run because its cost bound was exceeded.
class GuardError : public Error {
public:
    using Error::Error;
};

} // namespace fairsplit
