#pragma once

#include <array>
#include <cstdint>

#include "crom/mesh.hpp"
#include "crom/types.hpp"

namespace crom {

// FEM operators of the monodomain system on one scalar field. The stiffness
// carries the sign convention S = -integral(grad(psi_i) . D grad(psi_j)) so
// the semi-discrete potential equation reads M dx/dt = S x + ... with a plus
// sign in front of S.
struct AssembledOperators {
  SparseMatrix mass;        // M, symmetric positive definite
  SparseMatrix stiffness;   // S, symmetric negative semidefinite
  Vector input;             // b[i] = integral(psi_i)
  Vector output;            // c[j] = integral(D grad(psi_j) . n); y = c . x
  Index dimension = 0;      // N

  // Shape consistency plus symmetry of M and S within 1e-12 relative.
  void validate() const;

  // Order-independent fingerprint of the operator content; ROM archives are
  // tied to it.
  std::uint64_t content_hash() const;
};

// Trilinear hexahedra with 2x2x2 Gauss quadrature. flux_direction is the
// unit vector n of the recorded flux output. Elements are processed in
// per-thread chunks whose triplets merge in element order, so results do not
// depend on the thread count.
AssembledOperators assemble_operators(const Mesh& mesh, double d_iso,
                                      const std::array<double, 3>& flux_direction,
                                      int threads = 1);

}  // namespace crom
