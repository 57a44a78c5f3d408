#pragma once

#include <stdexcept>
#include <string>

namespace lasertune {

/// Argument outside the mathematical domain of a model.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Request that no sequence of anneals can satisfy (upshift, power cap, shot budget).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or field. The message carries the location.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model returned a non-finite value during fitting.
class FitEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lasertune
