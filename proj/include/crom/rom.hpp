#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/LU>

#include "crom/block_basis.hpp"
#include "crom/fom.hpp"
#include "crom/types.hpp"

namespace crom {

// DEIM data for the two nonlinear blocks. The stored bases carry extra
// trailing modes beyond the primary interpolation count; the extended set
// backs the online estimate of the hyperreduction residual. DEIM indices are
// nested, so the primary indices are the leading entries.
struct Hyperreduction {
  DenseMatrix U_phi, U_r;             // N x m_phi / N x m_r, orthonormal
  std::vector<Index> idx_phi, idx_r;  // DEIM indices, length m_phi / m_r
  Index n_ei_phi = 0, n_ei_r = 0;     // primary counts (<= m_*)

  Index n_ei() const { return n_ei_phi + n_ei_r; }
  Index ext_phi() const { return U_phi.cols(); }
  Index ext_r() const { return U_r.cols(); }
  Index n_ext() const { return ext_phi() + ext_r(); }
};

// POD of the accumulated nonlinear snapshots per block, then DEIM index
// selection over primary + extra modes (capped at the snapshot rank).
Hyperreduction build_hyperreduction(const DenseMatrix& snaps_phi,
                                    const DenseMatrix& snaps_r, Index n_ei_phi,
                                    Index n_ei_r, Index extra_modes);

// Upper-trapezoidal factor of the stacked residual pieces
//   Z = [AA V | EE V | B_s1 | B_s2 | W | W']
// with W = M_f U (P^T U)^{-1} over primary modes and W' its extended
// counterpart, so that per-step residual norms are ||R zeta|| for
// low-dimensional coefficient vectors. Column layout bookkeeping lives here.
struct ResidualFactor {
  DenseMatrix R;
  Index n = 0, n_inputs = 0, n_ei = 0, n_ext = 0;

  Index dim() const { return 2 * n + n_inputs + n_ei + n_ext; }
  bool empty() const { return R.size() == 0; }
};

struct RomTrajectory {
  DenseMatrix states;  // n x (n_steps + 1) when recorded
  Vector outputs;      // n_steps + 1
  Vector res_total, res_rb, res_ei;  // per-step norms (n_steps) when estimated
  bool has_states = false;
  bool has_norms = false;
};

struct ReducedModel {
  DenseMatrix EE_r, AA_r;  // n x n
  Vector B_s1_r, B_s2_r;   // reduced stimulus channels
  Vector C_r;              // reduced output row
  Vector x0_r;
  BlockBasis basis;
  Hyperreduction hyper;
  DenseMatrix deim_op;  // \hat{M}_f U (P^T U)^{-1}, n x n_ei (primary modes)

  // Row slices of the basis blocks at the extended interpolation nodes; the
  // online stage touches no size-N object except through these.
  DenseMatrix Vphi_rows_phi, Vr_rows_phi;  // ext_phi x n_phi, ext_phi x n_r
  DenseMatrix Vphi_rows_r, Vr_rows_r;      // ext_r x n_phi,  ext_r x n_r

  ResidualFactor residual;

  double dt = 0.0;
  Index n_steps = 0;
  Index N = 0;
  StimulusProtocol protocol;
  APParameters base_params;
  std::uint64_t operator_hash = 0;

  // Error-estimator state frozen by the greedy loop (see estimator.hpp).
  double rho_bar = 1.0;
  double beta = 0.0;
  double dual_residual_norm = 0.0;
  double dual_lifted_norm = 0.0;
  Index n_du = 0;
  double estimator_scaling = 1.0;
  double greedy_tol = 0.0;

  std::shared_ptr<const Eigen::PartialPivLU<DenseMatrix>> factorization;

  Index n() const { return EE_r.rows(); }
  std::pair<double, double> stimulus(Index k, const APParameters& p) const;

  // Nonlinearity sampled at the extended interpolation nodes of both blocks.
  void sampled_nonlinearity(const Vector& x_hat, const APParameters& p,
                            Vector& g_phi, Vector& g_r) const;

  // Full-order DEIM interpolant f_EI of a nodal nonlinearity (primary modes);
  // offline/verification path.
  Vector interpolate_nonlinearity(const Vector& f_full) const;

  void factorize();  // (re)build the dense factorization of EE_r
};

ReducedModel galerkin_project(const FullOrderSystem& fom, const BlockBasis& basis,
                              const Hyperreduction& hyper,
                              bool build_residual_factor = true);

struct RomSolveOptions {
  bool record_states = false;
  bool with_residual_norms = false;
};

RomTrajectory solve_rom(const ReducedModel& rom, const APParameters& p,
                        const RomSolveOptions& opts = {});

}  // namespace crom
