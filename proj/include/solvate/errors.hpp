#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace solvate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated modelling assumptions. Each entry is prefixed by a category such as "[ions]".
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class SupportViolation : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// A-priori bound on the potential exceeded; signals a solver or model bug.
class BoundViolation : public Error {
 public:
  using Error::Error;
};

class StagnationError : public Error {
 public:
  using Error::Error;
};

}  // namespace solvate
