#include "crom/greedy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "crom/block_basis.hpp"
#include "crom/errors.hpp"
#include "crom/parallel.hpp"
#include "crom/pod.hpp"

namespace crom {

APParameters with_parameter(const APParameters& base, const Parameter& p) {
  if (p.size() < 1 || p.size() > 2) {
    throw std::invalid_argument("parameter must be (gamma) or (gamma, t_s)");
  }
  APParameters out = base;
  out.gamma = p[0];
  if (p.size() > 1) out.t_s = p[1];
  return out;
}

CountUpdate update_counts(double delta_rb, double delta_ei, double tol, int c_rb,
                          int c_ei, Index n_ei_current) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (c_rb < 1 || c_ei < 1) {
    throw std::invalid_argument("c_rb and c_ei must be positive integers");
  }
  if (n_ei_current < 0) throw std::invalid_argument("n_ei_current must be non-negative");
  if (!std::isfinite(delta_rb) || !std::isfinite(delta_ei)) {
    throw std::invalid_argument("estimates fed to the update rule must be finite");
  }

  // The tiny shift absorbs representation error in log10 of exact powers of
  // ten; the unit indicator below never changes because of it.
  const auto decades = [&](double delta) {
    return static_cast<Index>(std::floor(std::log10(delta / tol) + 1e-12));
  };

  CountUpdate out;
  out.n_new = 0;
  if (delta_rb >= tol) {
    out.n_new = std::max<Index>(1, static_cast<Index>(c_rb) * decades(delta_rb));
  }
  Index ei_add = 0;
  if (delta_ei >= tol) {
    ei_add = std::max<Index>(c_ei, static_cast<Index>(c_ei) * decades(delta_ei));
  }
  out.n_ei_next = n_ei_current + ei_add;
  return out;
}

void adapt_training_set(std::vector<Parameter>& coarse, std::vector<Parameter>& fine,
                        const std::vector<double>& delta_coarse,
                        const std::vector<double>& delta_fine, double tol,
                        Index n_add, Index keep_index) {
  if (coarse.size() != delta_coarse.size()) {
    throw DimensionError("coarse set and its estimates have different sizes");
  }
  if (fine.size() != delta_fine.size()) {
    throw DimensionError("fine set and its estimates have different sizes");
  }
  if (keep_index < 0 || keep_index >= static_cast<Index>(coarse.size())) {
    throw std::invalid_argument("keep_index outside the coarse set");
  }

  std::vector<Parameter> kept;
  kept.reserve(coarse.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const bool is_kept_sample = static_cast<Index>(i) == keep_index;
    if (is_kept_sample || !(delta_coarse[i] < tol)) kept.push_back(coarse[i]);
  }

  // Move the n_add largest-estimate fine samples (ties -> smaller index).
  std::vector<std::size_t> order(fine.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return delta_fine[a] > delta_fine[b];
  });
  const std::size_t moving = std::min<std::size_t>(static_cast<std::size_t>(std::max<Index>(n_add, 0)),
                                                   fine.size());
  std::vector<bool> moved(fine.size(), false);
  for (std::size_t r = 0; r < moving; ++r) {
    kept.push_back(fine[order[r]]);
    moved[order[r]] = true;
  }
  std::vector<Parameter> remaining;
  remaining.reserve(fine.size() - moving);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    if (!moved[i]) remaining.push_back(fine[i]);
  }
  coarse = std::move(kept);
  fine = std::move(remaining);
}

namespace {

struct DeltaEval {
  double total = 0.0;
  double rb = 0.0;
  double ei = 0.0;
};

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

GreedyResult run_greedy(const FullOrderSystem& fom, const TrainingSets& sets,
                        const GreedyConfig& cfg, bool adaptive,
                        const GreedyCallbacks& cb) {
  std::vector<Parameter> training = adaptive ? sets.coarse : sets.train;
  std::vector<Parameter> fine = adaptive ? sets.fine : std::vector<Parameter>{};
  if (training.empty()) {
    throw std::invalid_argument(adaptive ? "coarse training set is empty"
                                         : "training set is empty");
  }
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (cfg.n_ei0_phi < 1 || cfg.n_ei0_r < 1) {
    throw std::invalid_argument("initial interpolation counts must be at least 1");
  }

  const auto t_start = std::chrono::steady_clock::now();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, training.size() - 1);
  Parameter p_star = training[pick(rng)];

  const DualModel dual = build_dual(fom, cfg.n_du);
  const double beta = compute_beta(fom.EE);

  BlockBasis basis;
  basis.V_phi.resize(fom.N, 0);
  basis.V_r.resize(fom.N, 0);
  DenseMatrix F_phi(fom.N, 0), F_r(fom.N, 0);

  Index n_ei_phi_target = cfg.n_ei0_phi;
  Index n_ei_r_target = cfg.n_ei0_r;
  Index n_add_rb = 0;  // iteration 1 uses the singular-value decay instead

  GreedyResult result;
  GreedyHistory& history = result.history;

  for (int iter = 1; iter <= static_cast<int>(cfg.max_iterations); ++iter) {
    const auto t_iter = std::chrono::steady_clock::now();

    const APParameters p_ap = with_parameter(fom.base_params, p_star);
    FomSolveOptions fom_opts;
    fom_opts.record_states = true;
    fom_opts.record_nonlinear = true;
    const Trajectory traj = solve_fom(fom, p_ap, fom_opts);

    double scaling = output_scaling(traj.outputs, ScalingMode::MaxOutput);
    if (!(scaling > 0.0)) scaling = 1.0;

    const auto X_phi = traj.states.topRows(fom.N);
    const auto X_r = traj.states.bottomRows(fom.N);

    Index add_phi = n_add_rb;
    Index add_r = n_add_rb;
    if (iter == 1) {
      add_phi = std::max<Index>(1, pod(X_phi, PodSelector::energy(cfg.svd_tol_phi)).retained);
      add_r = std::max<Index>(1, pod(X_r, PodSelector::energy(cfg.svd_tol_r)).retained);
    }
    update_basis(basis, X_phi, X_r, add_phi, add_r);

    const Index f_old = F_phi.cols();
    F_phi.conservativeResize(fom.N, f_old + traj.nonlinear.cols());
    F_r.conservativeResize(fom.N, f_old + traj.nonlinear.cols());
    F_phi.rightCols(traj.nonlinear.cols()) = traj.nonlinear.topRows(fom.N);
    F_r.rightCols(traj.nonlinear.cols()) = traj.nonlinear.bottomRows(fom.N);

    const Hyperreduction hyper =
        build_hyperreduction(F_phi, F_r, std::min(n_ei_phi_target, fom.N),
                             std::min(n_ei_r_target, fom.N), cfg.extra_ei_modes);

    ReducedModel rom = galerkin_project(fom, basis, hyper, true);
    rom.n_du = dual.V_du.cols();
    rom.greedy_tol = cfg.tol;
    rom.beta = beta;
    rom.dual_residual_norm = dual.residual_norm;
    rom.dual_lifted_norm = dual.lifted_norm;
    rom.rho_bar = estimate_rho_bar(traj.states, fom, rom, p_ap, beta);
    rom.estimator_scaling = scaling;

    EstimatorState est;
    est.rho_bar = rom.rho_bar;
    est.beta = beta;
    est.dual_residual_norm = dual.residual_norm;
    est.dual_lifted_norm = dual.lifted_norm;

    // Scaled estimates over the working training set; a diverged ROM solve
    // marks the sample with an infinite estimate so it is selected next.
    std::vector<DeltaEval> evals(training.size());
    parallel_for_chunks(static_cast<Index>(training.size()), cfg.threads,
                        [&](Index begin, Index end) {
                          for (Index i = begin; i < end; ++i) {
                            const auto& sample = training[static_cast<std::size_t>(i)];
                            DeltaEval& slot = evals[static_cast<std::size_t>(i)];
                            try {
                              const ErrorEstimate ee = error_estimate(
                                  rom, with_parameter(fom.base_params, sample), est);
                              slot.total = (ee.mean_rb + ee.mean_ei) / scaling;
                              slot.rb = ee.mean_rb / scaling;
                              slot.ei = ee.mean_ei / scaling;
                            } catch (const DivergenceError&) {
                              const double inf = std::numeric_limits<double>::infinity();
                              slot = DeltaEval{inf, inf, inf};
                            }
                          }
                        });

    Index best = 0;
    for (Index i = 1; i < static_cast<Index>(evals.size()); ++i) {
      if (evals[static_cast<std::size_t>(i)].total > evals[static_cast<std::size_t>(best)].total) {
        best = i;
      }
    }
    const DeltaEval& peak = evals[static_cast<std::size_t>(best)];

    GreedyIteration rec;
    rec.iteration = iter;
    rec.p_star = training[static_cast<std::size_t>(best)];
    rec.epsilon = peak.total;
    rec.delta_rb = peak.rb;
    rec.delta_ei = peak.ei;
    rec.scaling = scaling;
    rec.n_phi = basis.n_phi();
    rec.n_r = basis.n_r();
    rec.n_ei_phi = rom.hyper.n_ei_phi;
    rec.n_ei_r = rom.hyper.n_ei_r;
    rec.train_size = static_cast<Index>(training.size());
    rec.seconds = seconds_since(t_iter);

    if (cb.on_iteration) {
      std::vector<double> d_total(evals.size()), d_rb(evals.size()), d_ei(evals.size());
      for (std::size_t i = 0; i < evals.size(); ++i) {
        d_total[i] = evals[i].total;
        d_rb[i] = evals[i].rb;
        d_ei[i] = evals[i].ei;
      }
      cb.on_iteration(rec, training, d_total, d_rb, d_ei);
    }

    const bool converged = rec.epsilon < cfg.tol;
    history.iterations.push_back(rec);
    history.converged = converged;
    result.rom = std::move(rom);
    if (converged) break;

    p_star = rec.p_star;

    if (adaptive && !fine.empty() && training.size() >= 2) {
      std::vector<double> fit_values(evals.size());
      double largest_finite = 0.0;
      for (const auto& ev : evals) {
        if (std::isfinite(ev.total)) largest_finite = std::max(largest_finite, ev.total);
      }
      for (std::size_t i = 0; i < evals.size(); ++i) {
        fit_values[i] = std::isfinite(evals[i].total)
                            ? evals[i].total
                            : std::max(1.0, 10.0 * largest_finite);
      }
      const Index dim = training.front().size();
      DenseMatrix points(static_cast<Index>(training.size()), dim);
      for (std::size_t i = 0; i < training.size(); ++i) {
        points.row(static_cast<Index>(i)) = training[i].transpose();
      }
      Vector values(static_cast<Index>(fit_values.size()));
      for (std::size_t i = 0; i < fit_values.size(); ++i) {
        values[static_cast<Index>(i)] = fit_values[i];
      }
      const RbfSurrogate surrogate = fit_rbf(points, values, cfg.rbf);

      std::vector<double> delta_fine(fine.size());
      parallel_for_chunks(static_cast<Index>(fine.size()), cfg.threads,
                          [&](Index begin, Index end) {
                            for (Index i = begin; i < end; ++i) {
                              delta_fine[static_cast<std::size_t>(i)] =
                                  surrogate.eval(fine[static_cast<std::size_t>(i)]);
                            }
                          });
      std::vector<double> delta_coarse(evals.size());
      for (std::size_t i = 0; i < evals.size(); ++i) delta_coarse[i] = evals[i].total;
      adapt_training_set(training, fine, delta_coarse, delta_fine, cfg.tol, cfg.n_add,
                         best);
    }

    // A diverged sample carries an infinite estimate; the update rule instead
    // sees the largest finite estimate (or one decade above tol if there is
    // none) so the counts keep growing at a controlled rate.
    double upd_rb = peak.rb;
    double upd_ei = peak.ei;
    if (!std::isfinite(upd_rb) || !std::isfinite(upd_ei)) {
      double max_rb = 0.0, max_ei = 0.0;
      for (const auto& ev : evals) {
        if (std::isfinite(ev.rb)) max_rb = std::max(max_rb, ev.rb);
        if (std::isfinite(ev.ei)) max_ei = std::max(max_ei, ev.ei);
      }
      if (!std::isfinite(upd_rb)) upd_rb = max_rb > 0.0 ? max_rb : 10.0 * cfg.tol;
      if (!std::isfinite(upd_ei)) upd_ei = max_ei > 0.0 ? max_ei : 10.0 * cfg.tol;
    }
    const CountUpdate up_phi = update_counts(upd_rb, upd_ei, cfg.tol, cfg.c_rb,
                                             cfg.c_ei, n_ei_phi_target);
    const CountUpdate up_r = update_counts(upd_rb, upd_ei, cfg.tol, cfg.c_rb,
                                           cfg.c_ei, n_ei_r_target);
    n_add_rb = up_phi.n_new;
    const bool ei_grows = up_phi.n_ei_next > n_ei_phi_target;
    n_ei_phi_target = up_phi.n_ei_next;
    n_ei_r_target = up_r.n_ei_next;
    if (n_add_rb == 0 && !ei_grows) {
      n_add_rb = 1;  // both split estimates under tol but their sum is not
    }
  }

  history.total_seconds = seconds_since(t_start);
  return result;
}

}  // namespace

GreedyResult run_apodg_ei(const FullOrderSystem& fom, const TrainingSets& sets,
                          const GreedyConfig& config, const GreedyCallbacks& cb) {
  return run_greedy(fom, sets, config, /*adaptive=*/false, cb);
}

GreedyResult run_apodg_ei_adapt(const FullOrderSystem& fom, const TrainingSets& sets,
                                const GreedyConfig& config, const GreedyCallbacks& cb) {
  return run_greedy(fom, sets, config, /*adaptive=*/true, cb);
}

}  // namespace crom
