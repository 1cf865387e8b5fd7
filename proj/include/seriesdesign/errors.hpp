#pragma once

#include <stdexcept>
#include <string>

namespace seriesdesign {

/// Caller broke a documented precondition (wrong sizes, asymmetric input, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the domain of a function, e.g. a time outside [0,1].
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Base for failures of the numerical pipeline; the CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonIntegrableSample : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPsdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateKernel : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnsupportedCase : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The design does not identify the coefficient vector (singular B or C).
class UnderdeterminedDesign : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace seriesdesign
