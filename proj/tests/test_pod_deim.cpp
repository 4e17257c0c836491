#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/QR>

#include "crom/block_basis.hpp"
#include "crom/deim.hpp"
#include "crom/errors.hpp"
#include "crom/pod.hpp"

using namespace crom;

namespace {

DenseMatrix random_orthonormal(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = gauss(rng);
  }
  const Eigen::HouseholderQR<DenseMatrix> qr(a);
  return DenseMatrix(qr.householderQ()) * DenseMatrix::Identity(rows, cols);
}

// Straight-line re-implementation of the greedy interpolation recursion used
// as an independent oracle: explicit inverse of P^T U and a residual scan.
std::vector<Index> deim_oracle(const DenseMatrix& U) {
  std::vector<Index> picked;
  Index arg = 0;
  U.col(0).cwiseAbs().maxCoeff(&arg);
  picked.push_back(arg);
  for (Index j = 1; j < U.cols(); ++j) {
    DenseMatrix ptu(j, j);
    Vector rhs(j);
    for (Index r = 0; r < j; ++r) {
      for (Index c = 0; c < j; ++c) ptu(r, c) = U(picked[static_cast<std::size_t>(r)], c);
      rhs[r] = U(picked[static_cast<std::size_t>(r)], j);
    }
    const Vector coeff = ptu.inverse() * rhs;
    double best = -1.0;
    Index best_at = 0;
    for (Index i = 0; i < U.rows(); ++i) {
      double value = U(i, j);
      for (Index c = 0; c < j; ++c) value -= U(i, c) * coeff[c];
      if (std::abs(value) > best) {
        best = std::abs(value);
        best_at = i;
      }
    }
    picked.push_back(best_at);
  }
  return picked;
}

}  // namespace

TEST_CASE("energy rule on the worked singular values") {
  // Singular values {2, 1, 0.1}: tail after one mode is 1.01/5.01 > 0.01,
  // tail after two is 0.01/5.01 < 0.01.
  Vector sigma(3);
  sigma << 2.0, 1.0, 0.1;
  CHECK(energy_rank(sigma, 0.01) == 2);
  CHECK(energy_rank(sigma, 0.5) == 1);
  CHECK(energy_rank(sigma, 1e-9) == 3);

  DenseMatrix snapshots = DenseMatrix::Zero(5, 3);
  snapshots(0, 0) = 2.0;
  snapshots(1, 1) = 1.0;
  snapshots(2, 2) = 0.1;
  const PodBasis basis = pod(snapshots, PodSelector::energy(0.01));
  CHECK(basis.retained == 2);
  CHECK(basis.singular_values.size() == 3);
  CHECK(basis.singular_values[0] == doctest::Approx(2.0));
}

TEST_CASE("full basis reconstructs orthogonal snapshots") {
  const DenseMatrix snapshots = random_orthonormal(12, 4, 21) * 3.7;
  const PodBasis basis = pod(snapshots, PodSelector::fixed(4));
  CHECK(basis.retained == 4);
  const DenseMatrix recon = basis.vectors * (basis.vectors.transpose() * snapshots);
  CHECK((recon - snapshots).norm() <= 1e-12 * snapshots.norm());
}

TEST_CASE("rank-one snapshots keep one mode") {
  Vector u(6), w(3);
  u << 1, 2, 3, 4, 5, 6;
  w << 2, -1, 0.5;
  const DenseMatrix snapshots = u * w.transpose();
  const PodBasis basis = pod(snapshots, PodSelector::energy(0.5));
  CHECK(basis.retained == 1);
  CHECK(basis.singular_values.size() == 1);
}

TEST_CASE("zero snapshots give an empty basis") {
  const PodBasis basis = pod(DenseMatrix::Zero(8, 5), PodSelector::energy(0.1));
  CHECK(basis.retained == 0);
  CHECK(basis.vectors.cols() == 0);
}

TEST_CASE("tail energy identity") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix snapshots(20, 10);
  for (Index i = 0; i < 20; ++i) {
    for (Index j = 0; j < 10; ++j) snapshots(i, j) = gauss(rng);
  }
  const PodBasis basis = pod(snapshots, PodSelector::fixed(4));
  const DenseMatrix recon = basis.vectors * (basis.vectors.transpose() * snapshots);
  const double err_sq = (snapshots - recon).squaredNorm();
  double tail = 0.0;
  for (Index j = 4; j < basis.singular_values.size(); ++j) {
    tail += basis.singular_values[j] * basis.singular_values[j];
  }
  CHECK(err_sq == doctest::Approx(tail).epsilon(1e-8));
}

TEST_CASE("interpolation indices of the identity basis") {
  const DenseMatrix U = DenseMatrix::Identity(6, 2);
  const std::vector<Index> idx = deim_select(U);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == 0);
  CHECK(idx[1] == 1);
}

TEST_CASE("square orthonormal basis interpolates exactly") {
  const Index n = 9;
  const DenseMatrix U = random_orthonormal(n, n, 33);
  const std::vector<Index> idx = deim_select(U);

  DenseMatrix ptu(n, n);
  for (Index r = 0; r < n; ++r) ptu.row(r) = U.row(idx[static_cast<std::size_t>(r)]);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector f(n);
  for (Index i = 0; i < n; ++i) f[i] = gauss(rng);
  Vector sampled(n);
  for (Index r = 0; r < n; ++r) sampled[r] = f[idx[static_cast<std::size_t>(r)]];
  const Vector f_ei = U * ptu.partialPivLu().solve(sampled);
  CHECK((f_ei - f).norm() <= 1e-10 * f.norm());
}

TEST_CASE("greedy selection matches the straight-line oracle") {
  for (unsigned seed : {101u, 202u, 303u}) {
    const DenseMatrix U = random_orthonormal(5, 2, seed);
    CHECK(deim_select(U) == deim_oracle(U));
  }
  const DenseMatrix wide = random_orthonormal(40, 7, 404);
  CHECK(deim_select(wide) == deim_oracle(wide));
}

TEST_CASE("rank deficiency names the offending column") {
  DenseMatrix U(6, 2);
  U.col(0) = Vector::LinSpaced(6, 1.0, 2.0).normalized();
  U.col(1) = U.col(0);
  try {
    deim_select(U);
    FAIL("expected SelectionError");
  } catch (const SelectionError& e) {
    CHECK(std::string(e.what()).find("column 1") != std::string::npos);
  }
}

TEST_CASE("nested prefix property of the selection") {
  const DenseMatrix U = random_orthonormal(30, 8, 77);
  const std::vector<Index> full = deim_select(U);
  const std::vector<Index> prefix = deim_select(U.leftCols(5));
  for (std::size_t i = 0; i < prefix.size(); ++i) CHECK(prefix[i] == full[i]);
}

TEST_CASE("enrichment of an empty basis spans the snapshot modes") {
  const DenseMatrix snapshots = random_orthonormal(10, 3, 55) * 2.0;
  DenseMatrix basis(10, 0);
  const Index added = enrich_block(basis, snapshots, 3);
  CHECK(added == 3);
  const PodBasis direct = pod(snapshots, PodSelector::fixed(3));
  // Same subspace: projectors agree.
  const DenseMatrix p1 = basis * basis.transpose();
  const DenseMatrix p2 = direct.vectors * direct.vectors.transpose();
  CHECK((p1 - p2).norm() <= 1e-10);
}

TEST_CASE("snapshots already in the span add nothing") {
  DenseMatrix basis = random_orthonormal(12, 4, 66);
  Vector coeffs(4);
  coeffs << 1.0, -0.5, 2.0, 0.25;
  const DenseMatrix snapshots = basis * coeffs.asDiagonal() * DenseMatrix::Ones(4, 6);
  const Index added = enrich_block(basis, snapshots, 3);
  CHECK(added == 0);
  CHECK(basis.cols() == 4);
}

TEST_CASE("repeated updates stay orthonormal and preserve prefixes") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto random_snapshots = [&](Index rows, Index cols) {
    DenseMatrix out(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) out(i, j) = gauss(rng);
    }
    return out;
  };

  BlockBasis basis;
  basis.V_phi.resize(16, 0);
  basis.V_r.resize(16, 0);
  update_basis(basis, random_snapshots(16, 5), random_snapshots(16, 5), 3, 2);
  const DenseMatrix phi_before = basis.V_phi;
  update_basis(basis, random_snapshots(16, 5), random_snapshots(16, 5), 2, 2);

  CHECK(basis.n_phi() == 5);
  CHECK(basis.n_r() == 4);
  // Earlier columns are untouched by later enrichment.
  CHECK((basis.V_phi.leftCols(3) - phi_before).cwiseAbs().maxCoeff() == 0.0);

  const DenseMatrix gram_phi =
      basis.V_phi.transpose() * basis.V_phi - DenseMatrix::Identity(5, 5);
  const DenseMatrix gram_r =
      basis.V_r.transpose() * basis.V_r - DenseMatrix::Identity(4, 4);
  CHECK(gram_phi.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(gram_r.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lift and project are mutually consistent") {
  BlockBasis basis;
  basis.V_phi = random_orthonormal(10, 3, 91);
  basis.V_r = random_orthonormal(10, 2, 92);
  Vector reduced(5);
  reduced << 1, -2, 3, 0.5, 0.25;
  const Vector full = basis.lift(reduced);
  CHECK(full.size() == 20);
  const Vector back = basis.project(full);
  CHECK((back - reduced).norm() <= 1e-12);
  CHECK_THROWS_AS(basis.lift(Vector::Zero(4)), DimensionError);
  CHECK_THROWS_AS(basis.project(Vector::Zero(7)), DimensionError);
}
