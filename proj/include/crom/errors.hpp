#pragma once

#include <stdexcept>

namespace crom {

// Invalid user-facing arguments raise std::invalid_argument directly.
// The types below distinguish the remaining failure modes of the toolkit.

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HyperreductionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crom
