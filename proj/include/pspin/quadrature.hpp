#pragma once

#include <vector>

#include "pspin/errors.hpp"

namespace pspin {

// Gauss-Hermite rule rescaled to the standard normal measure: the weights sum
// to 1 and the rule integrates x^k exactly for k <= 2*order-1.
struct QuadratureRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch on the probabilists' Hermite recurrence.  1 <= order <= 512.
QuadratureRule hermite_rule(int order);

}  // namespace pspin
