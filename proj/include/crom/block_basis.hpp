#pragma once

#include "crom/types.hpp"

namespace crom {

// Block-diagonal projection basis diag(V_phi, V_r), stored per block.
struct BlockBasis {
  DenseMatrix V_phi;  // N x n_phi
  DenseMatrix V_r;    // N x n_r

  Index n_phi() const { return V_phi.cols(); }
  Index n_r() const { return V_r.cols(); }
  Index n() const { return n_phi() + n_r(); }
  Index full_dim() const { return V_phi.rows() + V_r.rows(); }

  Vector lift(const Vector& reduced) const;   // V x_hat
  Vector project(const Vector& full) const;   // V^T x
};

// Appends new columns to an orthonormal basis with modified Gram-Schmidt and
// one reorthogonalization pass; a column whose projected remainder falls
// below drop_tol relative to its incoming norm is discarded. Existing columns
// are never modified. Returns the number kept.
Index append_orthonormal(DenseMatrix& basis, const DenseMatrix& new_cols,
                         double drop_tol = 1e-10);

// POD-Greedy enrichment of one block: POD of the deflated snapshots
// X - V V^T X, append up to n_add modes. Deflated directions with singular
// value below 1e-12 * ||X||_F count as already represented. Returns the
// number of vectors added.
Index enrich_block(DenseMatrix& basis, const DenseMatrix& snapshots, Index n_add);

struct BlockUpdate {
  Index added_phi = 0;
  Index added_r = 0;
};

// Applies enrich_block to both variable blocks (two separate SVDs).
BlockUpdate update_basis(BlockBasis& basis, const DenseMatrix& snapshots_phi,
                         const DenseMatrix& snapshots_r, Index n_add_phi,
                         Index n_add_r);

}  // namespace crom
