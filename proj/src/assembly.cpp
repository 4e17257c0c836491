#include "crom/assembly.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "crom/errors.hpp"
#include "crom/parallel.hpp"

namespace crom {

namespace {

// Reference hexahedron corners in (xi, eta, zeta), matching the mesh
// connectivity order.
constexpr double kCorner[8][3] = {
    {-1.0, -1.0, -1.0}, {1.0, -1.0, -1.0}, {1.0, 1.0, -1.0}, {-1.0, 1.0, -1.0},
    {-1.0, -1.0, 1.0},  {1.0, -1.0, 1.0},  {1.0, 1.0, 1.0},  {-1.0, 1.0, 1.0}};

void shape_functions(const double xi[3], double N[8]) {
  for (int a = 0; a < 8; ++a) {
    N[a] = 0.125 * (1.0 + kCorner[a][0] * xi[0]) * (1.0 + kCorner[a][1] * xi[1]) *
           (1.0 + kCorner[a][2] * xi[2]);
  }
}

// dN[a][d] = dN_a/dxi_d
void shape_derivatives(const double xi[3], double dN[8][3]) {
  for (int a = 0; a < 8; ++a) {
    dN[a][0] = 0.125 * kCorner[a][0] * (1.0 + kCorner[a][1] * xi[1]) *
               (1.0 + kCorner[a][2] * xi[2]);
    dN[a][1] = 0.125 * kCorner[a][1] * (1.0 + kCorner[a][0] * xi[0]) *
               (1.0 + kCorner[a][2] * xi[2]);
    dN[a][2] = 0.125 * kCorner[a][2] * (1.0 + kCorner[a][0] * xi[0]) *
               (1.0 + kCorner[a][1] * xi[1]);
  }
}

std::uint64_t fnv1a_init() { return 14695981039346656037ull; }

void fnv1a_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
}

void fnv1a_double(std::uint64_t& h, double v) {
  if (v == 0.0) v = 0.0;  // merge signed zeros
  fnv1a_bytes(h, &v, sizeof(v));
}

void fnv1a_index(std::uint64_t& h, Index v) {
  const std::int64_t x = static_cast<std::int64_t>(v);
  fnv1a_bytes(h, &x, sizeof(x));
}

void hash_sparse(std::uint64_t& h, const SparseMatrix& m) {
  fnv1a_index(h, m.rows());
  fnv1a_index(h, m.cols());
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      fnv1a_index(h, it.row());
      fnv1a_index(h, it.col());
      fnv1a_double(h, it.value());
    }
  }
}

void hash_vector(std::uint64_t& h, const Vector& v) {
  fnv1a_index(h, v.size());
  for (Index i = 0; i < v.size(); ++i) fnv1a_double(h, v[i]);
}

double max_asymmetry(const SparseMatrix& m) {
  SparseMatrix diff = SparseMatrix(m.transpose()) - m;
  double worst = 0.0;
  for (Index col = 0; col < diff.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(diff, col); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

double max_abs(const SparseMatrix& m) {
  double worst = 0.0;
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

}  // namespace

void AssembledOperators::validate() const {
  const Index n = dimension;
  if (mass.rows() != n || mass.cols() != n) {
    throw DimensionError("mass matrix is " + std::to_string(mass.rows()) + "x" +
                         std::to_string(mass.cols()) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
  if (stiffness.rows() != n || stiffness.cols() != n) {
    throw DimensionError("stiffness matrix is " + std::to_string(stiffness.rows()) +
                         "x" + std::to_string(stiffness.cols()) + ", expected " +
                         std::to_string(n) + "x" + std::to_string(n));
  }
  if (input.size() != n) {
    throw DimensionError("input vector has length " + std::to_string(input.size()) +
                         ", expected " + std::to_string(n));
  }
  if (output.size() != n) {
    throw DimensionError("output vector has length " + std::to_string(output.size()) +
                         ", expected " + std::to_string(n));
  }
  const double mass_scale = max_abs(mass);
  if (mass_scale > 0.0 && max_asymmetry(mass) > 1e-12 * mass_scale) {
    throw ValidationError("mass matrix is asymmetric beyond 1e-12 relative");
  }
  const double stiff_scale = max_abs(stiffness);
  if (stiff_scale > 0.0 && max_asymmetry(stiffness) > 1e-12 * stiff_scale) {
    throw ValidationError("stiffness matrix is asymmetric beyond 1e-12 relative");
  }
}

std::uint64_t AssembledOperators::content_hash() const {
  std::uint64_t h = fnv1a_init();
  fnv1a_index(h, dimension);
  hash_sparse(h, mass);
  hash_sparse(h, stiffness);
  hash_vector(h, input);
  hash_vector(h, output);
  return h;
}

AssembledOperators assemble_operators(const Mesh& mesh, double d_iso,
                                      const std::array<double, 3>& flux_direction,
                                      int threads) {
  if (!(d_iso > 0.0)) {
    throw std::invalid_argument("d_iso must be positive");
  }
  const double dir_norm = std::sqrt(flux_direction[0] * flux_direction[0] +
                                    flux_direction[1] * flux_direction[1] +
                                    flux_direction[2] * flux_direction[2]);
  if (std::abs(dir_norm - 1.0) > 1e-10) {
    throw std::invalid_argument("flux_direction must be a unit vector");
  }
  mesh.validate();

  const Index n_nodes = mesh.node_count();
  const Index n_elems = mesh.element_count();

  // 2x2x2 Gauss points, weight 1 each.
  const double g = 1.0 / std::sqrt(3.0);
  double gp[8][3];
  for (int q = 0; q < 8; ++q) {
    gp[q][0] = g * kCorner[q][0];
    gp[q][1] = g * kCorner[q][1];
    gp[q][2] = g * kCorner[q][2];
  }

  struct ChunkOut {
    std::vector<Triplet> mass;
    std::vector<Triplet> stiffness;
    std::vector<Triplet> input;
    std::vector<Triplet> output;
  };

  const int workers = resolve_threads(threads);
  const Index n_chunks = std::min<Index>(workers, std::max<Index>(n_elems, 1));
  std::vector<ChunkOut> chunks(static_cast<std::size_t>(n_chunks));

  parallel_for_chunks(n_chunks, workers, [&](Index cb, Index ce) {
    for (Index chunk_id = cb; chunk_id < ce; ++chunk_id) {
      const Index per = (n_elems + n_chunks - 1) / n_chunks;
      const Index begin = chunk_id * per;
      const Index end = std::min(n_elems, begin + per);
      ChunkOut& out = chunks[static_cast<std::size_t>(chunk_id)];
      out.mass.reserve(static_cast<std::size_t>((end - begin) * 64));
      out.stiffness.reserve(static_cast<std::size_t>((end - begin) * 64));

      for (Index e = begin; e < end; ++e) {
        const auto& conn = mesh.element_connectivity[static_cast<std::size_t>(e)];
        double coords[8][3];
        for (int a = 0; a < 8; ++a) {
          const auto& p = mesh.node_coordinates[static_cast<std::size_t>(conn[a])];
          coords[a][0] = p[0];
          coords[a][1] = p[1];
          coords[a][2] = p[2];
        }

        double me[8][8] = {};
        double ke[8][8] = {};
        double be[8] = {};
        double ce_out[8] = {};

        for (int q = 0; q < 8; ++q) {
          double N[8];
          double dN[8][3];
          shape_functions(gp[q], N);
          shape_derivatives(gp[q], dN);

          Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
          for (int a = 0; a < 8; ++a) {
            for (int r = 0; r < 3; ++r) {
              for (int c = 0; c < 3; ++c) {
                jac(r, c) += dN[a][r] * coords[a][c];
              }
            }
          }
          const double det = jac.determinant();
          if (!(det > 0.0)) {
            throw AssemblyError("degenerate element " + std::to_string(e) +
                                " (Jacobian determinant " + std::to_string(det) + ")");
          }
          const Eigen::Matrix3d jac_inv = jac.inverse();

          // jac(r,c) = dx_c/dxi_r, so dN_a/dx_c = sum_r jac_inv(c,r) dN_a/dxi_r.
          double grad[8][3];
          for (int a = 0; a < 8; ++a) {
            for (int c = 0; c < 3; ++c) {
              grad[a][c] = jac_inv(c, 0) * dN[a][0] + jac_inv(c, 1) * dN[a][1] +
                           jac_inv(c, 2) * dN[a][2];
            }
          }

          for (int a = 0; a < 8; ++a) {
            be[a] += det * N[a];
            ce_out[a] += det * d_iso *
                         (grad[a][0] * flux_direction[0] + grad[a][1] * flux_direction[1] +
                          grad[a][2] * flux_direction[2]);
            for (int b = 0; b < 8; ++b) {
              // Grouping keeps each contribution bitwise symmetric in (a, b).
              me[a][b] += det * (N[a] * N[b]);
              ke[a][b] += (det * d_iso) *
                          (grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1] +
                           grad[a][2] * grad[b][2]);
            }
          }
        }

        for (int a = 0; a < 8; ++a) {
          out.input.emplace_back(conn[a], 0, be[a]);
          out.output.emplace_back(conn[a], 0, ce_out[a]);
          for (int b = 0; b < 8; ++b) {
            out.mass.emplace_back(conn[a], conn[b], me[a][b]);
            out.stiffness.emplace_back(conn[a], conn[b], -ke[a][b]);
          }
        }
      }
    }
  });

  std::vector<Triplet> mass_trip, stiff_trip, input_trip, output_trip;
  for (const auto& out : chunks) {
    mass_trip.insert(mass_trip.end(), out.mass.begin(), out.mass.end());
    stiff_trip.insert(stiff_trip.end(), out.stiffness.begin(), out.stiffness.end());
    input_trip.insert(input_trip.end(), out.input.begin(), out.input.end());
    output_trip.insert(output_trip.end(), out.output.begin(), out.output.end());
  }

  AssembledOperators ops;
  ops.dimension = n_nodes;
  ops.mass.resize(n_nodes, n_nodes);
  ops.mass.setFromTriplets(mass_trip.begin(), mass_trip.end());
  ops.stiffness.resize(n_nodes, n_nodes);
  ops.stiffness.setFromTriplets(stiff_trip.begin(), stiff_trip.end());

  SparseMatrix bvec(n_nodes, 1), cvec(n_nodes, 1);
  bvec.setFromTriplets(input_trip.begin(), input_trip.end());
  cvec.setFromTriplets(output_trip.begin(), output_trip.end());
  ops.input = Vector(bvec);
  ops.output = Vector(cvec);
  return ops;
}

}  // namespace crom
