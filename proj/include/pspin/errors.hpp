#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Covariance input fails the PSD tolerance.
struct NotPsdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Enumeration or sampling budget would be exceeded; no partial result is returned.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Overlap constraint admits no configuration.
struct InfeasibleConstraint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The +-1 gluing pattern admits no consistent sign assignment.
struct InconsistentGluing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MaxIterations : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pspin
