#pragma once

#include <vector>

#include "crom/types.hpp"

namespace crom {

// Greedy interpolation-index selection. The first index maximizes |U(:,0)|;
// index j maximizes the residual of interpolating column j with the previous
// columns at the previous indices. The indices selected for a column prefix
// are therefore a prefix of the full result.
std::vector<Index> deim_select(const DenseMatrix& U);

}  // namespace crom
