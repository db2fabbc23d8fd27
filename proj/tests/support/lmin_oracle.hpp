#pragma once

#include "relu1d/sparsity.hpp"

namespace relu1d::testing {

// Reference minimum piece count by exhaustive search: try p = 1, 2, ... and
// for each p enumerate every placement of p-1 interior joints, deciding
// feasibility per segmentation with a brute-force vertex-enumeration solve of
// the chained (entry value, exit value) constraint systems. Exponential in p,
// fine for small grids; intended for grids of at most ~12 points.
int min_linear_complexity_oracle(const TargetFunction& target, double eps0,
                                 int max_pieces = 6);

}  // namespace relu1d::testing
