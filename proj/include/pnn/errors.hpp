#pragma once

#include <stdexcept>

namespace pnn {

// Shape/dimension mismatches between containers.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid values or preconditions (empty data, non-positive variance, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cholesky failure on a non-positive-definite matrix.
struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss during optimization.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File parsing / filesystem failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pnn
