#pragma once

#include <stdexcept>
#include <string>

namespace udisc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input. The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown or failed optimality certificate. Exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public InputError {
public:
    using InputError::InputError;
};

class NotNormalized : public InputError {
public:
    using InputError::InputError;
};

class PriorsInvalid : public InputError {
public:
    using InputError::InputError;
};

class LinearlyDependent : public InputError {
public:
    using InputError::InputError;
};

class WeightsInvalid : public InputError {
public:
    using InputError::InputError;
};

class UnsupportedDimension : public InputError {
public:
    using InputError::InputError;
};

class StructureMismatch : public InputError {
public:
    using InputError::InputError;
};

class PreconditionFailed : public InputError {
public:
    using InputError::InputError;
};

class InfeasiblePoint : public InputError {
public:
    using InputError::InputError;
};

class SolverFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A classification residual exceeded its tolerance.
class CertificateViolation : public NumericalError {
public:
    CertificateViolation(std::string residual, double value, double tolerance)
        : NumericalError("certificate violation: " + residual + " = " + std::to_string(value) +
                         " (tolerance " + std::to_string(tolerance) + ")"),
          residual_(std::move(residual)),
          value_(value) {}

    const std::string& residual() const noexcept { return residual_; }
    double value() const noexcept { return value_; }

private:
    std::string residual_;
    double value_;
};

class NotInteriorOptimum : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ComplexResidue : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace udisc
