#include "crom/rbf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "crom/errors.hpp"

namespace crom {

namespace {

double kernel_value(const RbfConfig& config, double r) {
  switch (config.kernel) {
    case RbfKernel::ThinPlateSpline:
      return r > 0.0 ? r * r * std::log(r) : 0.0;
    case RbfKernel::Gaussian: {
      const double sr = config.shape * r;
      return std::exp(-sr * sr);
    }
  }
  return 0.0;
}

Vector normalize_point(const Vector& p, const Vector& lo, const Vector& hi) {
  Vector out(p.size());
  for (Index d = 0; d < p.size(); ++d) {
    const double span = hi[d] - lo[d];
    out[d] = span > 0.0 ? (p[d] - lo[d]) / span : 0.0;
  }
  return out;
}

}  // namespace

double RbfSurrogate::eval(const Vector& p) const {
  if (p.size() != centers.cols()) {
    throw DimensionError("query point dimension does not match the surrogate");
  }
  const Vector q = normalize_point(p, lo, hi);
  const Index m = centers.rows();
  const Index d = centers.cols();
  double value = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double r = (centers.row(i).transpose() - q).norm();
    value += weights[i] * kernel_value(config, r);
  }
  value += weights[m];  // constant term
  for (Index k = 0; k < d; ++k) value += weights[m + 1 + k] * q[k];
  return value;
}

RbfSurrogate fit_rbf(const DenseMatrix& points, const Vector& values,
                     const RbfConfig& config) {
  const Index m = points.rows();
  const Index d = points.cols();
  if (m != values.size()) {
    throw DimensionError("sample count does not match value count");
  }
  if (m < 2) throw std::invalid_argument("need at least two interpolation centers");

  RbfSurrogate s;
  s.config = config;
  s.lo = points.colwise().minCoeff().transpose();
  s.hi = points.colwise().maxCoeff().transpose();
  s.centers.resize(m, d);
  for (Index i = 0; i < m; ++i) {
    s.centers.row(i) = normalize_point(points.row(i).transpose(), s.lo, s.hi).transpose();
  }

  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      if ((s.centers.row(i) - s.centers.row(j)).norm() == 0.0) {
        throw std::invalid_argument("duplicate interpolation centers at rows " +
                                    std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  // Saddle system [K P; P^T 0] [w; a] = [y; 0] with P = [1 | centers].
  const Index tail = d + 1;
  const Index dim = m + tail;
  DenseMatrix A = DenseMatrix::Zero(dim, dim);
  Vector rhs = Vector::Zero(dim);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      const double r = (s.centers.row(i) - s.centers.row(j)).norm();
      A(i, j) = kernel_value(config, r);
    }
    A(i, m) = 1.0;
    A(m, i) = 1.0;
    for (Index k = 0; k < d; ++k) {
      A(i, m + 1 + k) = s.centers(i, k);
      A(m + 1 + k, i) = s.centers(i, k);
    }
    rhs[i] = values[i];
  }

  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    DenseMatrix regularized = A;
    if (jitter > 0.0) {
      for (Index i = 0; i < m; ++i) regularized(i, i) += jitter;
    }
    Eigen::FullPivLU<DenseMatrix> lu(regularized);
    if (lu.isInvertible()) {
      s.weights = lu.solve(rhs);
      return s;
    }
    jitter = (jitter == 0.0) ? 1e-12 * scale : jitter * 1e3;
  }
  throw EstimationError("radial basis interpolation system is singular even with jitter");
}

}  // namespace crom
