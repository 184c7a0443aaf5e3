#pragma once

#include <stdexcept>
#include <string>

namespace khessian {

/// Thrown when an argument lies outside the mathematical domain of an
/// operation (cone violations, non-positive metrics, bad indices).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown by iterative procedures that fail to meet their tolerance.
class IterationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace khessian
