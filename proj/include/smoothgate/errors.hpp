#pragma once

#include <stdexcept>
#include <string>

namespace smoothgate {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input (bad JSON, non-unitary operator, invalid request).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved)
      : Error(what + " (achieved " + std::to_string(achieved) + ")"), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Step-size underflow in an ODE integration.
class StiffnessError : public NumericError {
 public:
  StiffnessError(const std::string& what, double where)
      : NumericError(what, where), where_(where) {}

  /// The offending abscissa (χ for trajectory inversion, t for propagation).
  double where() const noexcept { return where_; }

 private:
  double where_;
};

class UnrepresentableTarget : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateZeta : public DomainError {
 public:
  using DomainError::DomainError;
};

class EndpointDivergence : public Error {
 public:
  EndpointDivergence(const std::string& what, double omega_end)
      : Error(what), omega_end_(omega_end) {}

  double omega_end() const noexcept { return omega_end_; }

 private:
  double omega_end_;
};

class SolverExhausted : public Error {
 public:
  SolverExhausted(const std::string& what, double best_objective)
      : Error(what), best_objective_(best_objective) {}

  double best_objective() const noexcept { return best_objective_; }

 private:
  double best_objective_;
};

class NoDecomposition : public Error {
 public:
  NoDecomposition(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace smoothgate
