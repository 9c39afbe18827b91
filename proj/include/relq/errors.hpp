#pragma once

#include <stdexcept>
#include <string>

namespace relq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Arguments outside the mathematical domain of an operation
/// (invalid spin labels, angles out of range, mismatched dimensions).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A dense computation would exceed the product-space dimension cap.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Bayes update requested for an outcome of zero probability.
class ImpossibleOutcomeError : public Error {
  public:
    using Error::Error;
};

/// Relative entropy requested where the posterior has mass the prior lacks.
class DivergenceError : public Error {
  public:
    using Error::Error;
};

/// Numerical self-checks failed (probabilities not normalized, bisection
/// bracket not monotone, quadrature not converging).
class ConsistencyError : public Error {
  public:
    using Error::Error;
};

} // namespace relq
