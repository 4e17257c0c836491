#pragma once

#include "crom/types.hpp"

namespace crom {

enum class RbfKernel { ThinPlateSpline, Gaussian };

struct RbfConfig {
  RbfKernel kernel = RbfKernel::ThinPlateSpline;
  double shape = 1.0;  // Gaussian width parameter
};

// Scattered-data interpolant with a linear polynomial tail. Inputs are
// normalized to the bounding box of the centers so parameters with very
// different scales (gamma ~ 1e-3, t_s ~ 5e2) condition well.
struct RbfSurrogate {
  DenseMatrix centers;  // m x d, normalized coordinates
  Vector lo, hi;        // normalization box per dimension
  Vector weights;       // m kernel weights + (d + 1) polynomial coefficients
  RbfConfig config;

  double eval(const Vector& p) const;
};

// points is m x d (one sample per row). Requires at least two distinct
// centers. A singular interpolation system is retried with escalating
// diagonal jitter before failing.
RbfSurrogate fit_rbf(const DenseMatrix& points, const Vector& values,
                     const RbfConfig& config = {});

}  // namespace crom
