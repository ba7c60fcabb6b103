#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace growthkit {

/// Broad failure category. The CLI maps each category onto an exit code.
enum class ErrorKind { validation, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Precondition and parameter failures.

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class UnsupportedAlphaError : public ParameterError {
 public:
  explicit UnsupportedAlphaError(const std::string& what) : ParameterError(what) {}
};

class NotApplicableError : public Error {
 public:
  explicit NotApplicableError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

// Numerical failures.

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Raised when an iteration fails to converge. Carries the best iterate seen.
class ConvergenceError : public NumericalError {
 public:
  enum class Reason { max_iterations, singular_jacobian, stalled };

  ConvergenceError(const std::string& what, Reason reason, std::vector<double> best, double best_residual)
      : NumericalError(what), reason_(reason), best_(std::move(best)), best_residual_(best_residual) {}

  Reason reason() const noexcept { return reason_; }
  const std::vector<double>& best_iterate() const noexcept { return best_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  Reason reason_;
  std::vector<double> best_;
  double best_residual_;
};

class RootNotFoundError : public NumericalError {
 public:
  explicit RootNotFoundError(const std::string& what) : NumericalError(what) {}
};

class StiffnessError : public NumericalError {
 public:
  StiffnessError(const std::string& what, double t, double h) : NumericalError(what), t_(t), h_(h) {}
  double time() const noexcept { return t_; }
  double step() const noexcept { return h_; }

 private:
  double t_;
  double h_;
};

class NonFiniteError : public NumericalError {
 public:
  NonFiniteError(const std::string& what, double t, std::vector<double> state)
      : NumericalError(what), t_(t), state_(std::move(state)) {}
  double time() const noexcept { return t_; }
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  double t_;
  std::vector<double> state_;
};

class RankDeficiencyError : public NumericalError {
 public:
  explicit RankDeficiencyError(const std::string& what) : NumericalError(what) {}
};

// Input/output failures, including malformed input files.

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line) : IoError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace growthkit
