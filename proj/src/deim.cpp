#include "crom/deim.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "crom/errors.hpp"

namespace crom {

std::vector<Index> deim_select(const DenseMatrix& U) {
  const Index n = U.rows();
  const Index m = U.cols();
  if (m == 0) return {};
  if (n < m) {
    throw SelectionError("basis has more columns (" + std::to_string(m) +
                         ") than rows (" + std::to_string(n) + ")");
  }

  std::vector<Index> indices;
  indices.reserve(static_cast<std::size_t>(m));

  Index first = 0;
  const double first_max = U.col(0).cwiseAbs().maxCoeff(&first);
  if (first_max == 0.0) {
    throw SelectionError("rank-deficient basis: column 0 is zero");
  }
  indices.push_back(first);

  for (Index j = 1; j < m; ++j) {
    DenseMatrix sampled(j, j);
    Vector rhs(j);
    for (Index r = 0; r < j; ++r) {
      for (Index c = 0; c < j; ++c) sampled(r, c) = U(indices[static_cast<std::size_t>(r)], c);
      rhs[r] = U(indices[static_cast<std::size_t>(r)], j);
    }
    const Vector coeffs = sampled.partialPivLu().solve(rhs);
    Vector residual = U.col(j) - U.leftCols(j) * coeffs;
    Index pick = 0;
    const double pick_max = residual.cwiseAbs().maxCoeff(&pick);
    const double scale = U.col(j).cwiseAbs().maxCoeff();
    if (!(pick_max > scale * 1e-13) || !std::isfinite(pick_max)) {
      throw SelectionError("rank-deficient basis: interpolation residual vanishes at column " +
                           std::to_string(j));
    }
    indices.push_back(pick);
  }
  return indices;
}

}  // namespace crom
