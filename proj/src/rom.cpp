#include "crom/rom.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "crom/deim.hpp"
#include "crom/errors.hpp"
#include "crom/pod.hpp"

namespace crom {

namespace {

DenseMatrix rows_at(const DenseMatrix& m, const std::vector<Index>& idx) {
  DenseMatrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Index>(r)) = m.row(idx[r]);
  }
  return out;
}

// U_primary (P^T U_primary)^{-1} for one block; throws if P^T U is singular.
DenseMatrix deim_projector(const DenseMatrix& U, const std::vector<Index>& idx,
                           Index primary, const char* block) {
  const DenseMatrix Up = U.leftCols(primary);
  DenseMatrix PtU(primary, primary);
  for (Index r = 0; r < primary; ++r) {
    PtU.row(r) = Up.row(idx[static_cast<std::size_t>(r)]);
  }
  // Right-multiplication by (P^T U)^{-1}: solve (P^T U)^T X = U^T instead.
  Eigen::FullPivLU<DenseMatrix> lu(PtU.transpose());
  if (lu.rank() < primary) {
    throw HyperreductionError(std::string("singular interpolation matrix P^T U in the ") +
                              block + " block");
  }
  return lu.solve(Up.transpose()).transpose();
}

}  // namespace

Hyperreduction build_hyperreduction(const DenseMatrix& snaps_phi,
                                    const DenseMatrix& snaps_r, Index n_ei_phi,
                                    Index n_ei_r, Index extra_modes) {
  if (n_ei_phi < 1 || n_ei_r < 1) {
    throw std::invalid_argument("primary interpolation counts must be at least 1");
  }
  if (extra_modes < 0) throw std::invalid_argument("extra_modes must be non-negative");

  Hyperreduction hyper;
  const PodBasis pod_phi = leading_pod(snaps_phi, n_ei_phi + extra_modes);
  const PodBasis pod_r = leading_pod(snaps_r, n_ei_r + extra_modes);
  if (pod_phi.retained == 0 || pod_r.retained == 0) {
    throw HyperreductionError("nonlinear snapshots have rank zero in one block");
  }
  hyper.U_phi = pod_phi.vectors;
  hyper.U_r = pod_r.vectors;
  hyper.n_ei_phi = std::min(n_ei_phi, pod_phi.retained);
  hyper.n_ei_r = std::min(n_ei_r, pod_r.retained);
  hyper.idx_phi = deim_select(hyper.U_phi);
  hyper.idx_r = deim_select(hyper.U_r);
  return hyper;
}

std::pair<double, double> ReducedModel::stimulus(Index k, const APParameters& p) const {
  if (protocol.kind != ProtocolKind::S1S2Scroll || k < 1) return {0.0, 0.0};
  const double t_prev = static_cast<double>(k - 1) * dt;
  const double s1 =
      (t_prev >= 0.0 && t_prev < protocol.s1_window) ? protocol.amplitude : 0.0;
  const double s2 = (t_prev >= p.t_s && t_prev < p.t_s + protocol.s2_duration)
                        ? protocol.amplitude
                        : 0.0;
  return {s1, s2};
}

namespace {

// The basis reconstruction at single interpolation nodes can overshoot the
// range the full state ever visits; past phi = -mu2 the recovery rate has a
// pole and one sampled value would blow up the march. Saturate the sampled
// reaction inputs well outside the physical range (phi in [0,1], r in [0,~2])
// so in-range dynamics are untouched.
constexpr double kPhiFloor = -0.2;
constexpr double kPhiCeil = 1.8;
constexpr double kRecoveryFloor = -1.0;
constexpr double kRecoveryCeil = 4.0;

void clamp_samples(Vector& phi, Vector& r) {
  phi = phi.cwiseMax(kPhiFloor).cwiseMin(kPhiCeil);
  r = r.cwiseMax(kRecoveryFloor).cwiseMin(kRecoveryCeil);
}

}  // namespace

void ReducedModel::sampled_nonlinearity(const Vector& x_hat, const APParameters& p,
                                        Vector& g_phi, Vector& g_r) const {
  const Index nphi = basis.n_phi();
  const auto x_phi = x_hat.head(nphi);
  const auto x_r = x_hat.tail(basis.n_r());

  // Potential block nodes: need phi and r sampled at idx_phi.
  Vector phi_p = to_dimensionless(Vphi_rows_phi * x_phi, p);
  Vector r_p = Vr_rows_phi * x_r;
  clamp_samples(phi_p, r_p);
  const ReactionRates at_phi = eval_reaction(phi_p, r_p, p);
  g_phi = at_phi.f_phi;

  Vector phi_q = to_dimensionless(Vphi_rows_r * x_phi, p);
  Vector r_q = Vr_rows_r * x_r;
  clamp_samples(phi_q, r_q);
  const ReactionRates at_r = eval_reaction(phi_q, r_q, p);
  g_r = at_r.f_r;
}

Vector ReducedModel::interpolate_nonlinearity(const Vector& f_full) const {
  if (f_full.size() != 2 * N) {
    throw DimensionError("nonlinearity vector has wrong length");
  }
  Vector out(2 * N);
  const auto apply_block = [](const DenseMatrix& U, const std::vector<Index>& idx,
                              Index primary, const Vector& f_block) {
    DenseMatrix PtU(primary, primary);
    Vector sampled(primary);
    for (Index r = 0; r < primary; ++r) {
      PtU.row(r) = U.row(idx[static_cast<std::size_t>(r)]).head(primary);
      sampled[r] = f_block[idx[static_cast<std::size_t>(r)]];
    }
    return Vector(U.leftCols(primary) * PtU.partialPivLu().solve(sampled));
  };
  out.head(N) = apply_block(hyper.U_phi, hyper.idx_phi, hyper.n_ei_phi, f_full.head(N));
  out.tail(N) = apply_block(hyper.U_r, hyper.idx_r, hyper.n_ei_r, f_full.tail(N));
  return out;
}

void ReducedModel::factorize() {
  auto lu = std::make_shared<Eigen::PartialPivLU<DenseMatrix>>(EE_r);
  factorization = std::move(lu);
}

ReducedModel galerkin_project(const FullOrderSystem& fom, const BlockBasis& basis,
                              const Hyperreduction& hyper, bool build_residual_factor) {
  if (basis.n() == 0) {
    throw std::invalid_argument("projection basis is empty");
  }
  if (basis.V_phi.rows() != fom.N || basis.V_r.rows() != fom.N) {
    throw DimensionError("basis block row counts do not match the system dimension");
  }
  if (hyper.U_phi.rows() != fom.N || hyper.U_r.rows() != fom.N) {
    throw DimensionError("hyperreduction basis rows do not match the system dimension");
  }

  ReducedModel rom;
  rom.basis = basis;
  rom.hyper = hyper;
  rom.dt = fom.dt;
  rom.n_steps = fom.n_steps;
  rom.N = fom.N;
  rom.protocol = fom.protocol;
  rom.base_params = fom.base_params;
  rom.operator_hash = fom.operator_hash;

  const Index n = basis.n();
  const Index nphi = basis.n_phi();
  const Index nr = basis.n_r();
  const double beta_t = fom.base_params.beta_t;

  // Blockwise triple products; the off-diagonal blocks of E, A vanish.
  const DenseMatrix M_Vphi = fom.mass * basis.V_phi;
  const DenseMatrix M_Vr = fom.mass * basis.V_r;
  const DenseMatrix EEphi_V = M_Vphi - fom.dt * (fom.stiffness * basis.V_phi);

  rom.AA_r = DenseMatrix::Zero(n, n);
  rom.AA_r.topLeftCorner(nphi, nphi) = basis.V_phi.transpose() * M_Vphi;
  rom.AA_r.bottomRightCorner(nr, nr) = beta_t * (basis.V_r.transpose() * M_Vr);

  rom.EE_r = rom.AA_r;
  rom.EE_r.topLeftCorner(nphi, nphi) = basis.V_phi.transpose() * EEphi_V;

  rom.B_s1_r = basis.project(fom.B_s1);
  rom.B_s2_r = basis.project(fom.B_s2);
  rom.C_r = basis.project(fom.C);
  rom.x0_r = basis.project(fom.x0);

  // Reduced-operator probe against the unstructured 2N triple product.
  {
    Vector probe = Vector::LinSpaced(n, 1.0, 2.0);
    const Vector lifted = basis.lift(probe);
    const Vector direct = basis.project(fom.EE * lifted);
    const Vector reduced = rom.EE_r * probe;
    const double scale = std::max(1.0, direct.norm());
    if ((direct - reduced).norm() > 1e-10 * scale) {
      throw ValidationError("reduced operator probe failed: V^T EE V mismatch");
    }
  }

  // Hyperreduction operator \hat{M}_f U (P^T U)^{-1}, assembled per block.
  const DenseMatrix proj_phi =
      deim_projector(hyper.U_phi, hyper.idx_phi, hyper.n_ei_phi, "potential");
  const DenseMatrix proj_r =
      deim_projector(hyper.U_r, hyper.idx_r, hyper.n_ei_r, "recovery");

  rom.deim_op = DenseMatrix::Zero(n, hyper.n_ei());
  rom.deim_op.topLeftCorner(nphi, hyper.n_ei_phi) =
      basis.V_phi.transpose() * (fom.mass * proj_phi);
  rom.deim_op.bottomRightCorner(nr, hyper.n_ei_r) =
      basis.V_r.transpose() * (fom.mass * proj_r);

  rom.Vphi_rows_phi = rows_at(basis.V_phi, hyper.idx_phi);
  rom.Vr_rows_phi = rows_at(basis.V_r, hyper.idx_phi);
  rom.Vphi_rows_r = rows_at(basis.V_phi, hyper.idx_r);
  rom.Vr_rows_r = rows_at(basis.V_r, hyper.idx_r);

  if (build_residual_factor) {
    const Index n_inputs = fom.has_stimulus() ? 2 : 0;
    const Index n_ei = hyper.n_ei();
    const Index n_ext = hyper.n_ext();
    const Index d = 2 * n + n_inputs + n_ei + n_ext;
    DenseMatrix Z(2 * fom.N, d);
    Index col = 0;

    // AA V = diag(M, beta_t M) V
    Z.block(0, col, fom.N, nphi) = M_Vphi;
    Z.block(fom.N, col, fom.N, nphi).setZero();
    Z.block(0, col + nphi, fom.N, nr).setZero();
    Z.block(fom.N, col + nphi, fom.N, nr) = beta_t * M_Vr;
    col += n;

    // EE V = diag(M - dt S, beta_t M) V
    Z.block(0, col, fom.N, nphi) = EEphi_V;
    Z.block(fom.N, col, fom.N, nphi).setZero();
    Z.block(0, col + nphi, fom.N, nr).setZero();
    Z.block(fom.N, col + nphi, fom.N, nr) = beta_t * M_Vr;
    col += n;

    if (n_inputs > 0) {
      Z.col(col) = fom.B_s1;
      Z.col(col + 1) = fom.B_s2;
      col += 2;
    }

    // W over primary modes, then W' over the extended set.
    Z.block(0, col, fom.N, hyper.n_ei_phi) = fom.mass * proj_phi;
    Z.block(fom.N, col, fom.N, hyper.n_ei_phi).setZero();
    Z.block(0, col + hyper.n_ei_phi, fom.N, hyper.n_ei_r).setZero();
    Z.block(fom.N, col + hyper.n_ei_phi, fom.N, hyper.n_ei_r) = fom.mass * proj_r;
    col += n_ei;

    const DenseMatrix ext_phi =
        deim_projector(hyper.U_phi, hyper.idx_phi, hyper.ext_phi(), "potential");
    const DenseMatrix ext_r =
        deim_projector(hyper.U_r, hyper.idx_r, hyper.ext_r(), "recovery");
    Z.block(0, col, fom.N, hyper.ext_phi()) = fom.mass * ext_phi;
    Z.block(fom.N, col, fom.N, hyper.ext_phi()).setZero();
    Z.block(0, col + hyper.ext_phi(), fom.N, hyper.ext_r()).setZero();
    Z.block(fom.N, col + hyper.ext_phi(), fom.N, hyper.ext_r()) = fom.mass * ext_r;
    col += n_ext;

    Eigen::HouseholderQR<DenseMatrix> qr(Z);
    const Index rrows = std::min<Index>(2 * fom.N, d);
    DenseMatrix R = qr.matrixQR().topRows(rrows);
    for (Index c = 0; c < R.cols(); ++c) {
      for (Index r = c + 1; r < R.rows(); ++r) R(r, c) = 0.0;
    }
    rom.residual.R = std::move(R);
    rom.residual.n = n;
    rom.residual.n_inputs = n_inputs;
    rom.residual.n_ei = n_ei;
    rom.residual.n_ext = n_ext;
  }

  rom.factorize();
  return rom;
}

RomTrajectory solve_rom(const ReducedModel& rom, const APParameters& p,
                        const RomSolveOptions& opts) {
  if (!rom.factorization) {
    throw std::invalid_argument("reduced model has no factorization");
  }
  const bool norms = opts.with_residual_norms;
  if (norms && rom.residual.empty()) {
    throw std::invalid_argument("reduced model carries no residual factor");
  }

  const Index n = rom.n();
  RomTrajectory rt;
  rt.outputs.resize(rom.n_steps + 1);
  rt.has_states = opts.record_states;
  rt.has_norms = norms;
  if (opts.record_states) rt.states.resize(n, rom.n_steps + 1);
  if (norms) {
    rt.res_total = Vector::Zero(rom.n_steps);
    rt.res_rb = Vector::Zero(rom.n_steps);
    rt.res_ei = Vector::Zero(rom.n_steps);
  }

  const Index n_ei_phi = rom.hyper.n_ei_phi;
  const Index n_ei_r = rom.hyper.n_ei_r;
  const Index ext_phi = rom.hyper.ext_phi();
  const Index ext_r = rom.hyper.ext_r();

  Vector x = rom.x0_r;
  rt.outputs[0] = rom.C_r.dot(x);
  if (opts.record_states) rt.states.col(0) = x;

  Vector g_phi, g_r, g_primary(n_ei_phi + n_ei_r);
  Vector zeta_rb, zeta_ei, zeta_tot;
  const ResidualFactor& rf = rom.residual;
  if (norms) {
    zeta_rb = Vector::Zero(rf.dim());
    zeta_ei = Vector::Zero(rf.dim());
    zeta_tot = Vector::Zero(rf.dim());
  }

  for (Index k = 1; k <= rom.n_steps; ++k) {
    rom.sampled_nonlinearity(x, p, g_phi, g_r);
    g_primary.head(n_ei_phi) = g_phi.head(n_ei_phi);
    g_primary.tail(n_ei_r) = g_r.head(n_ei_r);

    Vector rhs = rom.AA_r * x;
    rhs.noalias() += rom.dt * (rom.deim_op * g_primary);
    const auto [i1, i2] = rom.stimulus(k, p);
    if (i1 != 0.0) rhs += (rom.dt * i1) * rom.B_s1_r;
    if (i2 != 0.0) rhs += (rom.dt * i2) * rom.B_s2_r;

    Vector x_new = rom.factorization->solve(rhs);
    if (!x_new.allFinite()) {
      throw DivergenceError("non-finite reduced state at step " + std::to_string(k));
    }

    if (norms) {
      // Layout: [x_prev | -x_cur | inputs | primary W | extended W'].
      const Index off_in = 2 * n;
      const Index off_w = off_in + rf.n_inputs;
      const Index off_ext = off_w + rf.n_ei;

      zeta_rb.setZero();
      zeta_rb.head(n) = x;
      zeta_rb.segment(n, n) = -x_new;
      if (rf.n_inputs > 0) {
        zeta_rb[off_in] = rom.dt * i1;
        zeta_rb[off_in + 1] = rom.dt * i2;
      }
      zeta_rb.segment(off_w, rf.n_ei) = rom.dt * g_primary;

      zeta_ei.setZero();
      zeta_ei.segment(off_w, rf.n_ei) = -rom.dt * g_primary;
      zeta_ei.segment(off_ext, ext_phi) = rom.dt * g_phi;
      zeta_ei.segment(off_ext + ext_phi, ext_r) = rom.dt * g_r;

      zeta_tot = zeta_rb + zeta_ei;

      rt.res_rb[k - 1] = (rf.R * zeta_rb).norm();
      rt.res_ei[k - 1] = (rf.R * zeta_ei).norm();
      rt.res_total[k - 1] = (rf.R * zeta_tot).norm();
    }

    x = std::move(x_new);
    rt.outputs[k] = rom.C_r.dot(x);
    if (opts.record_states) rt.states.col(k) = x;
  }
  return rt;
}

}  // namespace crom
