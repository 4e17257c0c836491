#pragma once

#include "crom/types.hpp"

namespace crom {

struct PodBasis {
  DenseMatrix vectors;     // retained orthonormal columns
  Vector singular_values;  // all numerically nonzero sigma, descending
  Index retained = 0;      // == vectors.cols()
};

// Mode selection: either a fixed count or the squared-singular-value
// tail-energy rule (retain the smallest n for which
// sum_{j>n} sigma_j^2 / sum_j sigma_j^2 < tol).
struct PodSelector {
  static PodSelector fixed(Index count);
  static PodSelector energy(double tol);

  Index count = -1;        // >= 0 when fixed
  double energy_tol = -1;  // > 0 when energy-based
};

// Thin SVD of the snapshot matrix. An all-zero matrix yields an empty basis.
PodBasis pod(const DenseMatrix& snapshots, const PodSelector& selector);

// Leading k modes only. Large inputs go through a seeded randomized range
// finder with power iterations followed by an exact small SVD; small inputs
// fall back to the exact path. Deterministic for a given input.
PodBasis leading_pod(const DenseMatrix& snapshots, Index k);

// Count chosen by the tail-energy rule for precomputed singular values.
Index energy_rank(const Vector& singular_values, double tol);

}  // namespace crom
