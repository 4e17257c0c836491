#pragma once

#include <vector>

#include "crom/fom.hpp"
#include "crom/rom.hpp"
#include "crom/types.hpp"

namespace crom {

// Reduced dual system E_du x_du = C_du with E_du = EE^T and C_du = -C^T.
// Parameter-independent, so it is built once per mesh and time step.
struct DualModel {
  DenseMatrix V_du;           // 2N x m, orthonormal Krylov basis
  Vector x_du_hat;            // reduced dual solution
  double residual_norm = 0.0; // ||C_du - E_du x_du_lifted||
  double lifted_norm = 0.0;   // ||x_du_lifted||
  Index requested = 0;        // n_du asked for; V_du may be shorter on breakdown
};

// Polynomial Krylov basis {C_du, E_du C_du, ...} orthonormalized with MGS; a
// dependent direction truncates the basis early (recorded, not fatal). Relies
// on the symmetry of EE enforced at assembly/load time, so E_du = EE.
DualModel build_dual(const FullOrderSystem& fom, Index n_du);

// beta = 1 / sigma_min(EE) via a Krylov projection of (EE^T EE)^{-1} through
// one sparse LU factorization.
double compute_beta(const SparseMatrix& EE, double tol = 1e-9, int max_iterations = 200);

struct EstimatorState {
  double rho_bar = 1.0;
  double beta = 0.0;
  double dual_residual_norm = 0.0;
  double dual_lifted_norm = 0.0;

  double prefactor() const {
    return rho_bar * beta * dual_residual_norm +
           std::abs(1.0 - rho_bar) * dual_lifted_norm;
  }
};

struct ResidualSplit {
  Vector total;  // r^k
  Vector rb;     // reduced-basis part (ROM equations with f_EI)
  Vector ei;     // dt M_f (f - f_EI)
};

// Direct full-order residual of the lifted ROM trajectory at step k, with
// the additive RB/EI decomposition. Offline/verification path; the online
// norms come from the precomputed residual factor instead.
ResidualSplit primal_residual(const FullOrderSystem& fom, const ReducedModel& rom,
                              const RomTrajectory& rt, const APParameters& p, Index k);

// Median of ||x^k - x_tilde^k|| / (beta ||r^k||) over steps with nonzero
// residual, clamped to [1e-6, 1e6]; neutral 1 when every residual vanishes.
double rho_bar_from_series(const std::vector<double>& state_errors,
                           const std::vector<double>& residual_norms, double beta);

// rho_bar from the FOM snapshots at the current greedy parameter: solves the
// ROM at p, lifts, and feeds direct residuals into rho_bar_from_series.
double estimate_rho_bar(const DenseMatrix& fom_states, const FullOrderSystem& fom,
                        const ReducedModel& rom, const APParameters& p, double beta);

struct ErrorEstimate {
  Vector delta_k;        // per-step estimator, size n_steps
  double mean = 0.0;     // (1/N_t) sum_k delta_k
  double mean_rb = 0.0;  // same prefactor applied to the RB residual norms
  double mean_ei = 0.0;  // ... and to the hyperreduction residual norms
};

ErrorEstimate error_estimate(const ReducedModel& rom, const APParameters& p,
                             const EstimatorState& est);

enum class ScalingMode { MaxOutput, L2 };

struct OutputMetrics {
  double eps_rel = 0.0;
  double scaling = 0.0;
  bool scaling_fallback = false;  // max(Y) was non-positive, ||Y||_2 used
};

// eps_rel = ||Y - Y_hat||_2 / ||Y||_2 plus the scaling factor used to report
// scaled estimator values.
OutputMetrics metrics(const Vector& y_fom, const Vector& y_rom,
                      ScalingMode mode = ScalingMode::MaxOutput);

// Scaling factor alone (max(Y), with the same L2 fallback).
double output_scaling(const Vector& y, ScalingMode mode, bool* fell_back = nullptr);

}  // namespace crom
