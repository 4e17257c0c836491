#include "crom/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include <Eigen/SparseLU>

#include "crom/errors.hpp"

namespace crom {

DualModel build_dual(const FullOrderSystem& fom, Index n_du) {
  if (n_du < 1) throw std::invalid_argument("n_du must be at least 1");

  DualModel dual;
  dual.requested = n_du;
  const Index dim = fom.full_dim();
  const Vector c_du = -fom.C;

  if (c_du.norm() == 0.0) {
    dual.V_du.resize(dim, 0);
    dual.x_du_hat.resize(0);
    return dual;
  }

  // Polynomial Krylov space {C_du, E_du C_du, E_du^2 C_du, ...} with modified
  // Gram-Schmidt and one reorthogonalization pass. The Galerkin solve in this
  // space is a conjugate-gradient-type iterate, so the dual residual shrinks
  // with n_du instead of collapsing to roundoff outright. (Seeding the space
  // with E_du^{-1} C_du would contain the exact dual solution and make the
  // residual term of the estimator vanish identically.)
  DenseMatrix V(dim, n_du);
  Index cols = 0;
  Vector v = c_du;
  for (Index j = 0; j < n_du; ++j) {
    if (j > 0) v = fom.EE * v;  // E_du = EE^T = EE for the symmetric operators
    const double before = v.norm();
    Vector w = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < cols; ++c) w -= V.col(c).dot(w) * V.col(c);
    }
    const double after = w.norm();
    if (!(after > 1e-12 * before)) break;  // Krylov breakdown: truncate
    V.col(cols) = w / after;
    ++cols;
    v = w / after;
  }
  dual.V_du = V.leftCols(cols);

  // Dual ROM (V^T EE^T V) x_hat = V^T C_du; EE is symmetric by construction.
  const DenseMatrix E_small = dual.V_du.transpose() * (fom.EE * dual.V_du);
  const Vector c_small = dual.V_du.transpose() * c_du;
  dual.x_du_hat = E_small.partialPivLu().solve(c_small);

  const Vector lifted = dual.V_du * dual.x_du_hat;
  dual.lifted_norm = lifted.norm();
  dual.residual_norm = (c_du - fom.EE * lifted).norm();
  return dual;
}

double compute_beta(const SparseMatrix& EE, double tol, int max_iterations) {
  if (EE.rows() != EE.cols() || EE.rows() == 0) {
    throw std::invalid_argument("matrix must be square and non-empty");
  }
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(EE);
  if (lu.info() != Eigen::Success) {
    throw FactorizationError("sparse LU of EE failed; matrix may be singular");
  }

  // Krylov projection (Lanczos with full reorthogonalization) on the
  // symmetric operator T = (EE^T EE)^{-1}, whose largest eigenvalue is
  // 1/sigma_min(EE)^2. For a symmetric operator the Ritz residual bounds the
  // eigenvalue error directly, so clustered spectra cannot stall the
  // stopping test.
  const Index n = EE.rows();
  const auto apply_op = [&](const Vector& x) -> Vector {
    return lu.solve(lu.adjoint().solve(x));
  };

  std::mt19937_64 rng(0x5eedbeefULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();

  const Index m_max = std::min<Index>(n, max_iterations);
  DenseMatrix V(n, m_max), W(n, m_max);
  double last_residual = 1.0;
  for (Index j = 0; j < m_max; ++j) {
    V.col(j) = v;
    Vector w = apply_op(v);
    if (!w.allFinite()) {
      throw EstimationError("inverse solves broke down while estimating beta");
    }
    W.col(j) = w;

    const auto Vj = V.leftCols(j + 1);
    const auto Wj = W.leftCols(j + 1);
    DenseMatrix H = Vj.transpose() * Wj;
    H = 0.5 * (H + H.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(H);
    const Index top = j;  // eigenvalues ascend
    const double theta = eig.eigenvalues()[top];
    const Vector y = eig.eigenvectors().col(top);
    const Vector ritz = Vj * y;
    const double residual = (Wj * y - theta * ritz).norm();
    last_residual = residual / std::max(theta, 1e-300);
    if (!(theta > 0.0)) {
      throw EstimationError("Krylov projection produced a non-positive Ritz value");
    }
    if (residual <= tol * theta) return std::sqrt(theta);

    // Next direction; a breakdown means the Krylov space is invariant and
    // the Ritz value is already exact on it.
    for (int pass = 0; pass < 2; ++pass) {
      w -= Vj * (Vj.transpose() * w);
    }
    const double norm = w.norm();
    if (norm <= 1e-14 * W.col(j).norm()) return std::sqrt(theta);
    v = w / norm;
  }
  throw EstimationError("Krylov iteration for beta did not reach tolerance " +
                        std::to_string(tol) + " within " + std::to_string(m_max) +
                        " steps (last relative residual " +
                        std::to_string(last_residual) + ")");
}

ResidualSplit primal_residual(const FullOrderSystem& fom, const ReducedModel& rom,
                              const RomTrajectory& rt, const APParameters& p, Index k) {
  if (!rt.has_states) {
    throw std::invalid_argument("ROM trajectory was solved without recorded states");
  }
  if (k < 1 || k > rom.n_steps) {
    throw std::invalid_argument("step index outside [1, n_steps]");
  }
  const Index n = fom.N;
  const Vector x_prev = rom.basis.lift(rt.states.col(k - 1));
  const Vector x_cur = rom.basis.lift(rt.states.col(k));

  const Vector f = fom.nonlinearity(x_prev, p);
  const Vector f_ei = rom.interpolate_nonlinearity(f);

  const auto [i1, i2] = fom.stimulus(k, p);
  Vector common = fom.AA * x_prev - fom.EE * x_cur;
  if (i1 != 0.0) common += (fom.dt * i1) * fom.B_s1;
  if (i2 != 0.0) common += (fom.dt * i2) * fom.B_s2;

  const auto apply_mf = [&](const Vector& g) {
    Vector out(2 * n);
    out.head(n) = fom.mass * g.head(n);
    out.tail(n) = fom.mass * g.tail(n);
    return out;
  };

  ResidualSplit split;
  split.total = common + fom.dt * apply_mf(f);
  split.rb = common + fom.dt * apply_mf(f_ei);
  split.ei = fom.dt * apply_mf(f - f_ei);
  return split;
}

double rho_bar_from_series(const std::vector<double>& state_errors,
                           const std::vector<double>& residual_norms, double beta) {
  if (state_errors.size() != residual_norms.size()) {
    throw DimensionError("error and residual series have different lengths");
  }
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");

  std::vector<double> ratios;
  ratios.reserve(state_errors.size());
  for (std::size_t k = 0; k < state_errors.size(); ++k) {
    if (residual_norms[k] > 0.0) {
      ratios.push_back(state_errors[k] / (beta * residual_norms[k]));
    }
  }
  if (ratios.empty()) return 1.0;

  std::sort(ratios.begin(), ratios.end());
  const std::size_t m = ratios.size();
  const double median =
      (m % 2 == 1) ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
  return std::clamp(median, 1e-6, 1e6);
}

double estimate_rho_bar(const DenseMatrix& fom_states, const FullOrderSystem& fom,
                        const ReducedModel& rom, const APParameters& p, double beta) {
  if (fom_states.cols() != rom.n_steps + 1) {
    throw DimensionError("snapshot count does not match the time grid");
  }
  RomSolveOptions opts;
  opts.record_states = true;
  RomTrajectory rt;
  try {
    rt = solve_rom(rom, p, opts);
  } catch (const DivergenceError&) {
    return 1.0;  // no usable trajectory at this parameter: neutral calibration
  }

  std::vector<double> errors, residuals;
  errors.reserve(static_cast<std::size_t>(rom.n_steps));
  residuals.reserve(static_cast<std::size_t>(rom.n_steps));
  for (Index k = 1; k <= rom.n_steps; ++k) {
    const Vector lifted = rom.basis.lift(rt.states.col(k));
    errors.push_back((fom_states.col(k) - lifted).norm());
    residuals.push_back(primal_residual(fom, rom, rt, p, k).total.norm());
  }
  return rho_bar_from_series(errors, residuals, beta);
}

ErrorEstimate error_estimate(const ReducedModel& rom, const APParameters& p,
                             const EstimatorState& est) {
  RomSolveOptions opts;
  opts.with_residual_norms = true;
  const RomTrajectory rt = solve_rom(rom, p, opts);

  ErrorEstimate out;
  const double pf = est.prefactor();
  out.delta_k = pf * rt.res_total;
  if (rom.n_steps > 0) {
    const double inv_nt = 1.0 / static_cast<double>(rom.n_steps);
    out.mean = out.delta_k.sum() * inv_nt;
    out.mean_rb = pf * rt.res_rb.sum() * inv_nt;
    out.mean_ei = pf * rt.res_ei.sum() * inv_nt;
  }
  return out;
}

double output_scaling(const Vector& y, ScalingMode mode, bool* fell_back) {
  if (fell_back) *fell_back = false;
  if (mode == ScalingMode::L2) return y.norm();
  const double peak = y.size() > 0 ? y.maxCoeff() : 0.0;
  if (peak > 0.0) return peak;
  if (fell_back) *fell_back = true;
  std::fprintf(stderr,
               "warning: max output scaling is non-positive, falling back to the 2-norm\n");
  return y.norm();
}

OutputMetrics metrics(const Vector& y_fom, const Vector& y_rom, ScalingMode mode) {
  if (y_fom.size() != y_rom.size()) {
    throw DimensionError("output series lengths differ: " + std::to_string(y_fom.size()) +
                         " vs " + std::to_string(y_rom.size()));
  }
  const double denom = y_fom.norm();
  if (denom == 0.0) {
    throw MetricError("relative error undefined: reference output norm is zero");
  }
  OutputMetrics out;
  out.eps_rel = (y_fom - y_rom).norm() / denom;
  out.scaling = output_scaling(y_fom, mode, &out.scaling_fallback);
  return out;
}

}  // namespace crom
