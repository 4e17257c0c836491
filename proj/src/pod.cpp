#include "crom/pod.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace crom {

namespace {

DenseMatrix thin_q(const DenseMatrix& m) {
  const Index cols = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<DenseMatrix> qr(m);
  return qr.householderQ() * DenseMatrix::Identity(m.rows(), cols);
}

Index rank_cut(const Vector& sigma, Index rows, Index cols) {
  const double cutoff =
      sigma.size() > 0 ? sigma[0] * static_cast<double>(std::max(rows, cols)) *
                             std::numeric_limits<double>::epsilon()
                       : 0.0;
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > cutoff && sigma[rank] > 0.0) ++rank;
  return rank;
}

}  // namespace

PodSelector PodSelector::fixed(Index count) {
  if (count < 0) throw std::invalid_argument("fixed mode count must be non-negative");
  PodSelector s;
  s.count = count;
  return s;
}

PodSelector PodSelector::energy(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("energy tolerance must be positive");
  PodSelector s;
  s.energy_tol = tol;
  return s;
}

Index energy_rank(const Vector& singular_values, double tol) {
  const Index m = singular_values.size();
  if (m == 0) return 0;
  double total = 0.0;
  for (Index j = 0; j < m; ++j) total += singular_values[j] * singular_values[j];
  if (total == 0.0) return 0;
  double tail = total;
  for (Index n = 1; n <= m; ++n) {
    tail -= singular_values[n - 1] * singular_values[n - 1];
    if (tail / total < tol) return n;
  }
  return m;
}

PodBasis pod(const DenseMatrix& snapshots, const PodSelector& selector) {
  if (selector.count < 0 && !(selector.energy_tol > 0.0)) {
    throw std::invalid_argument("POD selector is neither fixed nor energy-based");
  }
  PodBasis basis;
  if (snapshots.size() == 0) return basis;

  Eigen::BDCSVD<DenseMatrix> svd(snapshots, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  const Index rank = rank_cut(sigma, snapshots.rows(), snapshots.cols());
  if (rank == 0) return basis;

  basis.singular_values = sigma.head(rank);
  const Index wanted = selector.count >= 0
                           ? selector.count
                           : energy_rank(basis.singular_values, selector.energy_tol);
  basis.retained = std::min(wanted, rank);
  basis.vectors = svd.matrixU().leftCols(basis.retained);
  return basis;
}

PodBasis leading_pod(const DenseMatrix& snapshots, Index k) {
  if (k < 0) throw std::invalid_argument("mode count must be non-negative");
  PodBasis basis;
  if (snapshots.size() == 0 || k == 0) return basis;

  const Index rows = snapshots.rows();
  const Index cols = snapshots.cols();
  const Index min_dim = std::min(rows, cols);
  const Index sketch = std::min(min_dim, k + 10);

  // Exact path when the sketch would not pay off.
  if (sketch >= min_dim || rows * cols <= (Index{1} << 21)) {
    return pod(snapshots, PodSelector::fixed(k));
  }

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix omega(cols, sketch);
  for (Index i = 0; i < cols; ++i) {
    for (Index j = 0; j < sketch; ++j) omega(i, j) = gauss(rng);
  }

  DenseMatrix range = snapshots * omega;
  for (int power = 0; power < 2; ++power) {
    range = thin_q(range);
    range = snapshots * (snapshots.transpose() * range).eval();
  }
  const DenseMatrix q = thin_q(range);
  const DenseMatrix small = q.transpose() * snapshots;  // sketch x cols

  Eigen::BDCSVD<DenseMatrix> svd(small, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  const Index rank = rank_cut(sigma, rows, cols);
  if (rank == 0) return basis;

  basis.singular_values = sigma.head(rank);
  basis.retained = std::min(k, rank);
  basis.vectors = q * svd.matrixU().leftCols(basis.retained);
  return basis;
}

}  // namespace crom
