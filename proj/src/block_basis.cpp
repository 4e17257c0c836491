#include "crom/block_basis.hpp"

#include <string>

#include "crom/errors.hpp"
#include "crom/pod.hpp"

namespace crom {

Vector BlockBasis::lift(const Vector& reduced) const {
  if (reduced.size() != n()) {
    throw DimensionError("reduced vector has length " + std::to_string(reduced.size()) +
                         ", basis expects " + std::to_string(n()));
  }
  Vector full(full_dim());
  full.head(V_phi.rows()) = V_phi * reduced.head(n_phi());
  full.tail(V_r.rows()) = V_r * reduced.tail(n_r());
  return full;
}

Vector BlockBasis::project(const Vector& full) const {
  if (full.size() != full_dim()) {
    throw DimensionError("full vector has length " + std::to_string(full.size()) +
                         ", basis expects " + std::to_string(full_dim()));
  }
  Vector reduced(n());
  reduced.head(n_phi()) = V_phi.transpose() * full.head(V_phi.rows());
  reduced.tail(n_r()) = V_r.transpose() * full.tail(V_r.rows());
  return reduced;
}

Index append_orthonormal(DenseMatrix& basis, const DenseMatrix& new_cols, double drop_tol) {
  if (new_cols.cols() == 0) return 0;
  if (basis.size() != 0 && basis.rows() != new_cols.rows()) {
    throw DimensionError("appended columns have mismatched row count");
  }
  const Index rows = new_cols.rows();
  if (basis.size() == 0) basis.resize(rows, 0);

  Index kept = 0;
  for (Index j = 0; j < new_cols.cols(); ++j) {
    Vector v = new_cols.col(j);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < basis.cols(); ++c) {
        v -= basis.col(c).dot(v) * basis.col(c);
      }
    }
    const double remaining = v.norm();
    if (remaining <= drop_tol * original) continue;
    basis.conservativeResize(rows, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v / remaining;
    ++kept;
  }
  return kept;
}

Index enrich_block(DenseMatrix& basis, const DenseMatrix& snapshots, Index n_add) {
  if (n_add <= 0 || snapshots.cols() == 0) return 0;
  DenseMatrix deflated = snapshots;
  if (basis.cols() > 0) {
    deflated.noalias() -= basis * (basis.transpose() * snapshots);
  }
  const PodBasis modes = leading_pod(deflated, n_add);
  if (modes.retained == 0) return 0;

  // Directions that only exist as deflation noise must not enter the basis.
  const double snapshot_scale = snapshots.norm();
  Index meaningful = 0;
  while (meaningful < modes.retained &&
         modes.singular_values[meaningful] > 1e-12 * snapshot_scale) {
    ++meaningful;
  }
  if (meaningful == 0) return 0;
  return append_orthonormal(basis, modes.vectors.leftCols(meaningful));
}

BlockUpdate update_basis(BlockBasis& basis, const DenseMatrix& snapshots_phi,
                         const DenseMatrix& snapshots_r, Index n_add_phi,
                         Index n_add_r) {
  BlockUpdate update;
  update.added_phi = enrich_block(basis.V_phi, snapshots_phi, n_add_phi);
  update.added_r = enrich_block(basis.V_r, snapshots_r, n_add_r);
  return update;
}

}  // namespace crom
