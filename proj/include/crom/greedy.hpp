#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crom/estimator.hpp"
#include "crom/fom.hpp"
#include "crom/rbf.hpp"
#include "crom/rom.hpp"
#include "crom/types.hpp"

namespace crom {

// Free parameter sample: (gamma) or (gamma, t_s).
using Parameter = Vector;

APParameters with_parameter(const APParameters& base, const Parameter& p);

struct TrainingSets {
  std::vector<Parameter> train, test;
  std::vector<Parameter> coarse, fine;  // adaptive sampling variant
};

struct GreedyConfig {
  double tol = 1e-2;
  int c_rb = 1;
  int c_ei = 1;
  double svd_tol_phi = 0.5;  // first-iteration basis size selectors
  double svd_tol_r = 0.5;
  Index n_ei0_phi = 8;
  Index n_ei0_r = 8;
  Index max_iterations = 20;
  std::uint64_t seed = 0;
  Index n_du = 20;
  Index n_add = 1;            // samples moved from fine to coarse per iteration
  Index extra_ei_modes = 10;  // per-block estimation headroom past the primary modes
  int threads = 1;
  RbfConfig rbf;
};

struct GreedyIteration {
  int iteration = 0;
  Parameter p_star;        // selected greedy parameter (argmax of the estimate)
  double epsilon = 0.0;    // scaled Delta_RB(p*) + Delta_EI(p*)
  double delta_rb = 0.0;   // scaled components at p*
  double delta_ei = 0.0;
  double scaling = 1.0;    // max output at the snapshot parameter
  Index n_phi = 0, n_r = 0;
  Index n_ei_phi = 0, n_ei_r = 0;
  Index train_size = 0;    // samples whose estimate was evaluated this iteration
  double seconds = 0.0;
};

struct GreedyHistory {
  std::vector<GreedyIteration> iterations;
  bool converged = false;
  double total_seconds = 0.0;
};

// Per-block basis-count update (Eq.-style rule): the reduced basis gains
// c_rb * floor(log10(delta_rb/tol)) vectors, at least 1 while delta_rb is
// still at or above tol; the interpolation count grows by
// c_ei * floor(log10(delta_ei/tol)), at least c_ei under the same condition.
// Estimates already below tol contribute no growth.
struct CountUpdate {
  Index n_new = 0;      // reduced-basis vectors to add per block
  Index n_ei_next = 0;  // next per-block interpolation count
};
CountUpdate update_counts(double delta_rb, double delta_ei, double tol, int c_rb,
                          int c_ei, Index n_ei_current);

// Coarse-set maintenance: drop coarse samples whose estimate fell below tol
// (the current argmax sample is always retained), then move the n_add
// fine-set samples with the largest interpolated estimate into the coarse set.
void adapt_training_set(std::vector<Parameter>& coarse, std::vector<Parameter>& fine,
                        const std::vector<double>& delta_coarse,
                        const std::vector<double>& delta_fine, double tol,
                        Index n_add, Index keep_index);

struct GreedyCallbacks {
  std::function<void(const GreedyIteration&, const std::vector<Parameter>& evaluated,
                     const std::vector<double>& delta,
                     const std::vector<double>& delta_rb,
                     const std::vector<double>& delta_ei)>
      on_iteration;
};

struct GreedyResult {
  ReducedModel rom;
  GreedyHistory history;
};

// Adaptive POD-Greedy-DEIM over the full training set.
GreedyResult run_apodg_ei(const FullOrderSystem& fom, const TrainingSets& sets,
                          const GreedyConfig& config, const GreedyCallbacks& cb = {});

// Same loop with coarse/fine training-set adaptation driven by the radial
// basis surrogate of the error estimate.
GreedyResult run_apodg_ei_adapt(const FullOrderSystem& fom, const TrainingSets& sets,
                                const GreedyConfig& config, const GreedyCallbacks& cb = {});

}  // namespace crom
