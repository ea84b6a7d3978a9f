#pragma once

#include <stdexcept>
#include <string>

namespace psd {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration has vanishing total moment of inertia (all particles coincident).
class ZeroInertiaError : public Error {
public:
    using Error::Error;
};

/// Two or more particles coincide where the Newton potential is evaluated.
class SingularPotentialError : public Error {
public:
    using Error::Error;
};

/// Zero shape momentum: the direction of motion is undefined.
class UndefinedDirectionError : public Error {
public:
    using Error::Error;
};

/// The branch root argument -(1 + 2V/kappa) is negative.
class BranchDomainError : public Error {
public:
    using Error::Error;
};

/// Fields defined on incompatible sphere discretizations.
class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

/// A configuration-space wave function is not constant along similarity orbits.
class NotProjectableError : public Error {
public:
    using Error::Error;
};

/// kappa reached the degeneracy floor: the 1/sqrt(kappa) rates blow up.
class DegenerateRateError : public Error {
public:
    using Error::Error;
};

/// Trajectory too short for the requested diagnostic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration or preset failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace psd
