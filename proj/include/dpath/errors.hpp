#pragma once

#include <stdexcept>
#include <string>

namespace dpath {

enum class ErrorKind {
  invalid_argument,
  resource_limit,
  degenerate_system,
  degenerate_simplex,
  integration_failure,
  functional_evaluation,
  oracle_infeasible,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::resource_limit: return "resource-limit";
    case ErrorKind::degenerate_system: return "degenerate-system";
    case ErrorKind::degenerate_simplex: return "degenerate-simplex";
    case ErrorKind::integration_failure: return "integration-failure";
    case ErrorKind::functional_evaluation: return "functional-evaluation";
    case ErrorKind::oracle_infeasible: return "oracle-infeasible";
  }
  return "unknown";
}

/** Base class for every error raised by the library. */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

class ResourceLimit : public Error {
 public:
  explicit ResourceLimit(const std::string& what) : Error(ErrorKind::resource_limit, what) {}
};

/** A constraint matrix with no usable rank. */
class DegenerateSystem : public Error {
 public:
  explicit DegenerateSystem(const std::string& what) : Error(ErrorKind::degenerate_system, what) {}
};

class DegenerateSimplex : public Error {
 public:
  explicit DegenerateSimplex(const std::string& what) : Error(ErrorKind::degenerate_simplex, what) {}
};

/** A flow produced a non-finite value or could not meet its tolerance. */
class IntegrationFailure : public Error {
 public:
  explicit IntegrationFailure(const std::string& what) : Error(ErrorKind::integration_failure, what) {}
};

class FunctionalEvaluationError : public Error {
 public:
  explicit FunctionalEvaluationError(const std::string& what)
      : Error(ErrorKind::functional_evaluation, what) {}
};

/** Rejection sampling accepted too few samples to say anything. */
class OracleInfeasible : public Error {
 public:
  explicit OracleInfeasible(const std::string& what) : Error(ErrorKind::oracle_infeasible, what) {}
};

}  // namespace dpath
