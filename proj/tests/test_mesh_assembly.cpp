#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "crom/assembly.hpp"
#include "crom/errors.hpp"
#include "crom/mesh.hpp"

using namespace crom;

namespace {

double sparse_sum(const SparseMatrix& m) {
  double total = 0.0;
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) total += it.value();
  }
  return total;
}

double max_abs_asymmetry(const SparseMatrix& m) {
  const SparseMatrix diff = SparseMatrix(m.transpose()) - m;
  double worst = 0.0;
  for (Index col = 0; col < diff.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(diff, col); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("single hexahedron block mesh") {
  const Mesh mesh = build_block_mesh(1, 1, 1, {1.0, 1.0, 1.0});
  CHECK(mesh.node_count() == 8);
  CHECK(mesh.element_count() == 1);
  CHECK(mesh.node_set("left_edge").size() == 4);
}

TEST_CASE("benchmark block discretization sizes") {
  const Mesh mesh = build_block_mesh(31, 31, 2, {20.0, 20.0, 1.25});
  CHECK(mesh.node_count() == 3072);  // 32 * 32 * 3
  CHECK(mesh.element_count() == 31 * 31 * 2);
  mesh.validate();
}

TEST_CASE("left edge enumerates the x = 0 face") {
  const Mesh mesh = build_block_mesh(2, 1, 1, {2.0, 1.0, 1.0});
  const auto& left = mesh.node_set("left_edge");
  CHECK(left.size() == 4);  // 2 x 2 nodes of the 3x2x2 grid
  for (const Index node : left) {
    CHECK(mesh.node_coordinates[static_cast<std::size_t>(node)][0] == 0.0);
  }
}

TEST_CASE("s2 region is the lower-left quadrant") {
  const Mesh mesh = build_block_mesh(4, 4, 1, {4.0, 4.0, 1.0});
  const auto& region = mesh.node_set("s2_region");
  // Nodes at x <= 2 and y <= 2 over all z: 3 * 3 * 2.
  CHECK(region.size() == 18);
}

TEST_CASE("invalid block arguments are rejected") {
  CHECK_THROWS_AS(build_block_mesh(0, 1, 1, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_block_mesh(1, -2, 1, {1, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_block_mesh(1, 1, 1, {1, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_block_mesh(1, 1, 1, {1, 1, -3.0}), std::invalid_argument);
}

TEST_CASE("unit cube mass rows sum to an eighth") {
  const Mesh mesh = build_block_mesh(1, 1, 1, {1.0, 1.0, 1.0});
  const AssembledOperators ops = assemble_operators(mesh, 1.0, {1, 0, 0});
  const Vector row_sums = ops.mass * Vector::Ones(8);
  for (Index i = 0; i < 8; ++i) {
    CHECK(row_sums[i] == doctest::Approx(0.125).epsilon(1e-12));
  }
  // Row sums of M coincide with the input vector by partition of unity.
  CHECK((row_sums - ops.input).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("stiffness annihilates constants") {
  const Mesh mesh = build_block_mesh(3, 2, 2, {3.0, 1.0, 0.5});
  const AssembledOperators ops = assemble_operators(mesh, 0.7, {0, 1, 0});
  const Vector constant = Vector::Constant(ops.dimension, 4.2);
  const double stiff_scale = ops.stiffness.coeffs().cwiseAbs().maxCoeff();
  CHECK((ops.stiffness * constant).cwiseAbs().maxCoeff() <= 1e-12 * stiff_scale);
}

TEST_CASE("input vector sums to the domain volume") {
  const Mesh mesh = build_block_mesh(5, 4, 3, {2.5, 1.0, 0.75});
  const AssembledOperators ops = assemble_operators(mesh, 0.1, {1, 0, 0});
  CHECK(ops.input.sum() == doctest::Approx(2.5 * 1.0 * 0.75).epsilon(1e-12));
}

TEST_CASE("mass is exactly symmetric and positive definite") {
  const Mesh mesh = build_block_mesh(4, 3, 2, {1.0, 2.0, 0.5});
  const AssembledOperators ops = assemble_operators(mesh, 0.3, {0, 0, 1});
  CHECK(max_abs_asymmetry(ops.mass) == 0.0);
  CHECK(max_abs_asymmetry(ops.stiffness) == 0.0);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(ops.dimension);
    for (Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    if (x.norm() == 0.0) continue;
    CHECK(x.dot(ops.mass * x) > 0.0);
  }
}

TEST_CASE("total mass equals the volume across refinements") {
  for (const auto& [nx, ny, nz] : {std::array<Index, 3>{1, 1, 1},
                                   std::array<Index, 3>{2, 3, 1},
                                   std::array<Index, 3>{5, 5, 2}}) {
    const std::array<double, 3> lengths = {1.7, 0.9, 0.4};
    const Mesh mesh = build_block_mesh(nx, ny, nz, lengths);
    const AssembledOperators ops = assemble_operators(mesh, 1.0, {1, 0, 0});
    const double volume = lengths[0] * lengths[1] * lengths[2];
    CHECK(sparse_sum(ops.mass) == doctest::Approx(volume).epsilon(1e-12));
  }
}

TEST_CASE("output row integrates the directional gradient") {
  // For a linear field Phi = a x, c . x must equal d_iso * a * volume.
  const Mesh mesh = build_block_mesh(3, 3, 2, {2.0, 1.5, 1.0});
  const double d_iso = 0.25;
  const AssembledOperators ops = assemble_operators(mesh, d_iso, {1, 0, 0});
  Vector field(ops.dimension);
  for (Index i = 0; i < ops.dimension; ++i) {
    field[i] = 3.0 * mesh.node_coordinates[static_cast<std::size_t>(i)][0];
  }
  const double expected = d_iso * 3.0 * (2.0 * 1.5 * 1.0);
  CHECK(ops.output.dot(field) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("assembly argument validation") {
  const Mesh mesh = build_block_mesh(1, 1, 1, {1, 1, 1});
  CHECK_THROWS_AS(assemble_operators(mesh, 0.0, {1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_operators(mesh, -1.0, {1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(assemble_operators(mesh, 1.0, {1, 1, 0}), std::invalid_argument);
}

TEST_CASE("degenerate element reports its id") {
  Mesh mesh = build_block_mesh(2, 1, 1, {2, 1, 1});
  // Collapse the second element to zero thickness.
  const auto& conn = mesh.element_connectivity[1];
  for (int a = 4; a < 8; ++a) {
    mesh.node_coordinates[static_cast<std::size_t>(conn[a])][2] = 0.0;
  }
  try {
    assemble_operators(mesh, 1.0, {1, 0, 0});
    FAIL("expected AssemblyError");
  } catch (const AssemblyError& e) {
    CHECK(std::string(e.what()).find("element 1") != std::string::npos);
  }
}

TEST_CASE("thread count does not change the assembled values") {
  const Mesh mesh = build_block_mesh(6, 5, 2, {3.0, 2.5, 1.0});
  const AssembledOperators serial = assemble_operators(mesh, 0.15, {0, 1, 0}, 1);
  const AssembledOperators parallel = assemble_operators(mesh, 0.15, {0, 1, 0}, 4);
  CHECK(serial.content_hash() == parallel.content_hash());
}

TEST_CASE("mesh validation catches bad connectivity") {
  Mesh mesh = build_block_mesh(1, 1, 1, {1, 1, 1});
  mesh.element_connectivity[0][3] = 99;
  CHECK_THROWS_AS(mesh.validate(), ValidationError);

  Mesh repeated = build_block_mesh(1, 1, 1, {1, 1, 1});
  repeated.element_connectivity[0][1] = repeated.element_connectivity[0][0];
  CHECK_THROWS_AS(repeated.validate(), ValidationError);

  Mesh bad_set = build_block_mesh(1, 1, 1, {1, 1, 1});
  bad_set.node_sets["broken"] = {42};
  CHECK_THROWS_AS(bad_set.validate(), ValidationError);
}
