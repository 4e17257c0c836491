// Benchmark acceptance suite: drives the shipped configurations end to end
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "crom/assembly.hpp"
#include "crom/block_basis.hpp"
#include "crom/commands.hpp"
#include "crom/config.hpp"
#include "crom/deim.hpp"
#include "crom/estimator.hpp"
#include "crom/fom.hpp"
#include "crom/greedy.hpp"
#include "crom/mesh.hpp"
#include "crom/operator_io.hpp"
#include "crom/pod.hpp"
#include "crom/rom.hpp"
#include "crom/rom_io.hpp"
#include "crom/waveform.hpp"

#ifndef CROM_CONFIG_DIR
#define CROM_CONFIG_DIR "configs"
#endif
#ifndef CROM_CLI_PATH
#define CROM_CLI_PATH ""
#endif

namespace {

namespace fs = std::filesystem;
using namespace crom;

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s: %s — %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return std::string(buffer);
}

FullOrderSystem small_planar_fom(Index nx, Index ny, Index nz, double dt, Index steps,
                                 double gamma) {
  const Mesh mesh = build_block_mesh(nx, ny, nz, {10.0, 10.0, 1.0});
  const AssembledOperators ops = assemble_operators(mesh, 0.1, {1, 0, 0});
  APParameters params;
  params.gamma = gamma;
  StimulusProtocol protocol;
  protocol.kind = ProtocolKind::PlanarInitialCondition;
  return build_fom(ops, mesh.node_sets, params, dt, steps, protocol);
}

Hyperreduction identity_hyper(Index n, Index primary) {
  Hyperreduction hyper;
  hyper.U_phi = DenseMatrix::Identity(n, n);
  hyper.U_r = DenseMatrix::Identity(n, n);
  hyper.idx_phi.resize(static_cast<std::size_t>(n));
  std::iota(hyper.idx_phi.begin(), hyper.idx_phi.end(), Index{0});
  hyper.idx_r = hyper.idx_phi;
  hyper.n_ei_phi = primary;
  hyper.n_ei_r = primary;
  return hyper;
}

BlockBasis identity_basis(Index n) {
  BlockBasis basis;
  basis.V_phi = DenseMatrix::Identity(n, n);
  basis.V_r = DenseMatrix::Identity(n, n);
  return basis;
}

EstimatorState estimator_from(const ReducedModel& rom) {
  EstimatorState est;
  est.rho_bar = rom.rho_bar;
  est.beta = rom.beta;
  est.dual_residual_norm = rom.dual_residual_norm;
  est.dual_lifted_norm = rom.dual_lifted_norm;
  return est;
}

struct ValidationSummary {
  double max_eps_rel = 0.0;
  double mean_fom_seconds = 0.0;
  double mean_rom_seconds = 0.0;
  double speedup() const {
    return mean_rom_seconds > 0.0 ? mean_fom_seconds / mean_rom_seconds : 0.0;
  }
};

ValidationSummary validate_on_tests(const FullOrderSystem& fom, const ReducedModel& rom,
                                    const std::vector<Parameter>& test_set) {
  ValidationSummary out;
  for (const Parameter& p : test_set) {
    const APParameters ap = with_parameter(fom.base_params, p);
    const auto t_fom = std::chrono::steady_clock::now();
    FomSolveOptions opts;
    opts.record_states = false;
    const Trajectory traj = solve_fom(fom, ap, opts);
    out.mean_fom_seconds += seconds_since(t_fom);

    const auto t_rom = std::chrono::steady_clock::now();
    const RomTrajectory rt = solve_rom(rom, ap);
    out.mean_rom_seconds += seconds_since(t_rom);

    out.max_eps_rel = std::max(out.max_eps_rel, metrics(traj.outputs, rt.outputs).eps_rel);
  }
  const double count = static_cast<double>(test_set.size());
  out.mean_fom_seconds /= count;
  out.mean_rom_seconds /= count;
  return out;
}

bool coarse_size_changes(const GreedyHistory& history) {
  for (std::size_t i = 1; i < history.iterations.size(); ++i) {
    if (history.iterations[i].train_size != history.iterations[0].train_size) return true;
  }
  return false;
}

bool histories_identical(const GreedyHistory& a, const GreedyHistory& b) {
  if (a.converged != b.converged || a.iterations.size() != b.iterations.size()) return false;
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    const auto& x = a.iterations[i];
    const auto& y = b.iterations[i];
    if ((x.p_star - y.p_star).cwiseAbs().maxCoeff() != 0.0) return false;
    if (x.epsilon != y.epsilon || x.delta_rb != y.delta_rb || x.delta_ei != y.delta_ei)
      return false;
    if (x.n_phi != y.n_phi || x.n_r != y.n_r || x.n_ei_phi != y.n_ei_phi ||
        x.n_ei_r != y.n_ei_r || x.train_size != y.train_size)
      return false;
  }
  return true;
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string configs = argc > 1 ? argv[1] : CROM_CONFIG_DIR;
  const std::string work = argc > 2 ? argv[2] : "acceptance_work";
  fs::create_directories(work);

  // ---------------------------------------------------------------- 1 & 2
  RunConfig planar = load_run_config(configs + "/planar_block.json");
  planar.threads = 1;
  planar.greedy.threads = 1;

  const FullOrderSystem planar_fom = build_fom_from_config(planar);
  const TrainingSets planar_sets = make_training_sets(planar);

  GreedyResult alg1 = run_apodg_ei(planar_fom, planar_sets, planar.greedy);
  const ValidationSummary v1 = validate_on_tests(planar_fom, alg1.rom, planar_sets.test);

  report("criterion 1 (planar greedy + test accuracy)",
         planar_sets.train.size() == 80 && planar_sets.test.size() == 20 &&
             alg1.history.converged && alg1.history.iterations.size() <= 10 &&
             v1.max_eps_rel < 1e-2,
         fmt("converged=%d iterations=%zu max_eps_rel=%.3e (tol 1e-2), split %zu:%zu",
             (int)alg1.history.converged, alg1.history.iterations.size(), v1.max_eps_rel,
             planar_sets.train.size(), planar_sets.test.size()));

  const Index n_total = alg1.rom.n();
  const Index n_ei_total = alg1.rom.hyper.n_ei();
  report("criterion 2 (compression + speedup)",
         n_total >= 20 && n_total <= 150 && n_ei_total >= 30 && n_ei_total <= 200 &&
             v1.speedup() > 2.0,
         fmt("n=%lld in [20,150], n_ei=%lld in [30,200], speedup=%.1fx (>2 required)",
             (long long)n_total, (long long)n_ei_total, v1.speedup()));

  // Published-run consistency: about five iterations (within two) and basis
  // sizes within fifty percent of the reported 57 / 64.
  report("published-run consistency (planar)",
         alg1.history.iterations.size() >= 3 && alg1.history.iterations.size() <= 7 &&
             n_total >= 29 && n_total <= 85 && n_ei_total >= 32 && n_ei_total <= 96,
         fmt("iterations=%zu in [3,7], n=%lld in [29,85], n_ei=%lld in [32,96]",
             alg1.history.iterations.size(), (long long)n_total, (long long)n_ei_total));

  // ------------------------------------------------------------------- 3
  GreedyResult alg2 = run_apodg_ei_adapt(planar_fom, planar_sets, planar.greedy);
  const ValidationSummary v2 = validate_on_tests(planar_fom, alg2.rom, planar_sets.test);
  report("criterion 3 (adaptive training set)",
         alg2.history.converged && v2.max_eps_rel < 1e-2 &&
             alg2.history.total_seconds < alg1.history.total_seconds &&
             coarse_size_changes(alg2.history),
         fmt("alg2 %.1fs vs alg1 %.1fs, coarse %lld -> %lld, max_eps_rel=%.3e",
             alg2.history.total_seconds, alg1.history.total_seconds,
             (long long)alg2.history.iterations.front().train_size,
             (long long)alg2.history.iterations.back().train_size, v2.max_eps_rel));

  // ------------------------------------------------------------------- 4
  RunConfig scroll = load_run_config(configs + "/scroll_block.json");
  scroll.threads = 1;
  scroll.greedy.threads = 1;
  const FullOrderSystem scroll_fom = build_fom_from_config(scroll);

  Parameter quiet_p(2), reentry_p(2);
  quiet_p << 0.0017, 488.0;
  reentry_p << 0.0020, 484.0;

  const auto classify = [&](const Vector& outputs) {
    return sustained_activity(outputs, scroll.dt, scroll.classification.tail_start,
                              scroll.classification.threshold);
  };

  FomSolveOptions no_states;
  no_states.record_states = false;
  const Trajectory fom_quiet =
      solve_fom(scroll_fom, with_parameter(scroll.ap, quiet_p), no_states);
  const Trajectory fom_reentry =
      solve_fom(scroll_fom, with_parameter(scroll.ap, reentry_p), no_states);
  const bool fom_quiet_class = classify(fom_quiet.outputs);
  const bool fom_reentry_class = classify(fom_reentry.outputs);

  const TrainingSets scroll_sets = make_training_sets(scroll);
  GreedyResult scroll_rom = run_apodg_ei_adapt(scroll_fom, scroll_sets, scroll.greedy);

  const RomTrajectory rom_quiet =
      solve_rom(scroll_rom.rom, with_parameter(scroll.ap, quiet_p));
  const RomTrajectory rom_reentry =
      solve_rom(scroll_rom.rom, with_parameter(scroll.ap, reentry_p));
  const double eps_quiet = metrics(fom_quiet.outputs, rom_quiet.outputs).eps_rel;
  const double eps_reentry = metrics(fom_reentry.outputs, rom_reentry.outputs).eps_rel;

  report("criterion 4 (scroll-wave classification)",
         !fom_quiet_class && fom_reentry_class && scroll_rom.history.converged &&
             scroll_rom.history.iterations.size() <= 5 &&
             classify(rom_quiet.outputs) == fom_quiet_class &&
             classify(rom_reentry.outputs) == fom_reentry_class && eps_quiet < 1.0 &&
             eps_reentry < 1.0,
         fmt("FOM classes (%d,%d), ROM classes (%d,%d), eps_rel %.3f/%.3f (tol 1.0), "
             "converged in %zu iterations",
             (int)fom_quiet_class, (int)fom_reentry_class, (int)classify(rom_quiet.outputs),
             (int)classify(rom_reentry.outputs), eps_quiet, eps_reentry,
             scroll_rom.history.iterations.size()));

  // ------------------------------------------------------------------- 5
  {
    // (a) residual split identity on a truncated ROM.
    const FullOrderSystem tiny = small_planar_fom(2, 1, 1, 0.5, 30, 0.006);
    const Trajectory traj = solve_fom(tiny, tiny.base_params);
    BlockBasis basis;
    basis.V_phi = pod(traj.states.topRows(tiny.N), PodSelector::fixed(3)).vectors;
    basis.V_r = pod(traj.states.bottomRows(tiny.N), PodSelector::fixed(3)).vectors;
    const ReducedModel rom = galerkin_project(tiny, basis, identity_hyper(tiny.N, 4));
    RomSolveOptions opts;
    opts.record_states = true;
    const RomTrajectory rt = solve_rom(rom, tiny.base_params, opts);
    double worst = 0.0;
    for (Index k = 1; k <= tiny.n_steps; ++k) {
      const ResidualSplit split = primal_residual(tiny, rom, rt, tiny.base_params, k);
      worst = std::max(worst, (split.total - split.rb - split.ei).cwiseAbs().maxCoeff());
    }
    report("criterion 5a (residual split identity)", worst <= 1e-12,
           fmt("max |r - r_rb - r_ei| = %.2e (<= 1e-12)", worst));
  }
  {
    // (b) full-rank ROM equals the FOM on a 2x1x1 mesh.
    const FullOrderSystem tiny = small_planar_fom(2, 1, 1, 0.5, 40, 0.005);
    const ReducedModel rom =
        galerkin_project(tiny, identity_basis(tiny.N), identity_hyper(tiny.N, tiny.N));
    const Trajectory full = solve_fom(tiny, tiny.base_params);
    const RomTrajectory reduced = solve_rom(rom, tiny.base_params);
    const double err = (full.outputs - reduced.outputs).cwiseAbs().maxCoeff();
    const double scale = full.outputs.cwiseAbs().maxCoeff() + 1.0;
    report("criterion 5b (full-rank ROM = FOM)", err <= 1e-8 * scale,
           fmt("max output gap %.2e (<= %.2e)", err, 1e-8 * scale));
  }
  {
    // (c) interpolation is exact on span(U).
    const FullOrderSystem tiny = small_planar_fom(3, 3, 1, 0.5, 40, 0.006);
    const Trajectory traj = solve_fom(tiny, tiny.base_params, {true, true});
    Hyperreduction hyper;
    hyper.U_phi = pod(traj.nonlinear.topRows(tiny.N), PodSelector::fixed(6)).vectors;
    hyper.U_r = pod(traj.nonlinear.bottomRows(tiny.N), PodSelector::fixed(6)).vectors;
    hyper.n_ei_phi = hyper.U_phi.cols();
    hyper.n_ei_r = hyper.U_r.cols();
    hyper.idx_phi = deim_select(hyper.U_phi);
    hyper.idx_r = deim_select(hyper.U_r);
    BlockBasis basis;
    basis.V_phi = pod(traj.states.topRows(tiny.N), PodSelector::fixed(4)).vectors;
    basis.V_r = pod(traj.states.bottomRows(tiny.N), PodSelector::fixed(4)).vectors;
    const ReducedModel rom = galerkin_project(tiny, basis, hyper);
    Vector f(2 * tiny.N);
    f.head(tiny.N) = hyper.U_phi * Vector::LinSpaced(hyper.n_ei_phi, -1.0, 1.0);
    f.tail(tiny.N) = hyper.U_r * Vector::LinSpaced(hyper.n_ei_r, 0.5, 2.0);
    const double err = (rom.interpolate_nonlinearity(f) - f).norm() / f.norm();
    report("criterion 5c (interpolation exact on span U)", err <= 1e-10,
           fmt("relative gap %.2e (<= 1e-10)", err));
  }
  {
    // (d) squared-singular-value tail identity.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseMatrix snapshots(40, 15);
    for (Index i = 0; i < snapshots.rows(); ++i) {
      for (Index j = 0; j < snapshots.cols(); ++j) snapshots(i, j) = gauss(rng);
    }
    const PodBasis basis = pod(snapshots, PodSelector::fixed(6));
    const double err_sq =
        (snapshots - basis.vectors * (basis.vectors.transpose() * snapshots)).squaredNorm();
    double tail = 0.0;
    for (Index j = 6; j < basis.singular_values.size(); ++j) {
      tail += basis.singular_values[j] * basis.singular_values[j];
    }
    report("criterion 5d (tail-energy identity)",
           std::abs(err_sq - tail) <= 1e-8 * std::max(1.0, tail),
           fmt("|%.6e - %.6e| relative %.2e (<= 1e-8)", err_sq, tail,
               std::abs(err_sq - tail) / std::max(1.0, tail)));
  }
  {
    // (e) count update rule.
    const bool ok = update_counts(1e-1, 1e-3, 1e-6, 1, 1, 8).n_new == 5 &&
                    update_counts(1e-6, 1e-7, 1e-6, 1, 1, 8).n_new == 1 &&
                    update_counts(1e-4, 1e-7, 1e-6, 11, 6, 8).n_new == 22 &&
                    update_counts(1e-1, 1e-3, 1e-6, 1, 1, 8).n_ei_next == 11 &&
                    update_counts(1e-7, 1e-8, 1e-6, 1, 1, 8).n_new == 0;
    report("criterion 5e (update-rule table)", ok,
           "five-decade example yields n = 5; floors and below-tol cases hold");
  }
  {
    // (f) first-order self-convergence.
    const double T = 16.0;
    const auto run = [&](double dt) {
      const Index steps = static_cast<Index>(std::llround(T / dt));
      const FullOrderSystem sys = small_planar_fom(8, 8, 1, dt, steps, 0.005);
      FomSolveOptions opts;
      opts.record_states = false;
      return solve_fom(sys, sys.base_params, opts).outputs;
    };
    const Vector coarse = run(0.4);
    const Vector medium = run(0.2);
    const Vector reference = run(0.05);
    double err_coarse = 0.0, err_medium = 0.0;
    for (Index k = 0; k < coarse.size(); ++k) {
      err_coarse += std::pow(coarse[k] - reference[8 * k], 2);
      err_medium += std::pow(medium[2 * k] - reference[8 * k], 2);
    }
    const double ratio = std::sqrt(err_coarse) / std::sqrt(err_medium);
    report("criterion 5f (first-order self-convergence)", ratio > 1.5 && ratio < 2.5,
           fmt("halving ratio %.3f in [1.5, 2.5]", ratio));
  }
  {
    // (g) estimator vanishes with the residual.
    const FullOrderSystem tiny = small_planar_fom(2, 1, 1, 0.5, 15, 0.005);
    const ReducedModel rom =
        galerkin_project(tiny, identity_basis(tiny.N), identity_hyper(tiny.N, tiny.N));
    EstimatorState est;
    est.rho_bar = 1.0;
    est.beta = compute_beta(tiny.EE);
    const DualModel dual = build_dual(tiny, 10);
    est.dual_residual_norm = dual.residual_norm;
    est.dual_lifted_norm = dual.lifted_norm;
    const ErrorEstimate ee = error_estimate(rom, tiny.base_params, est);
    report("criterion 5g (zero residual, zero estimate)",
           ee.delta_k.minCoeff() >= 0.0 && ee.mean <= 1e-7,
           fmt("mean estimate %.2e on the exact ROM (<= 1e-7)", ee.mean));
  }
  {
    // (h) deterministic replay.
    const FullOrderSystem mini = small_planar_fom(6, 6, 1, 2.0, 80, 0.002);
    TrainingSets sets;
    for (int i = 0; i < 9; ++i) {
      Parameter p(1);
      p << 0.001 + 0.001 * i;
      sets.train.push_back(p);
    }
    GreedyConfig cfg;
    cfg.tol = 0.05;
    cfg.max_iterations = 6;
    cfg.n_ei0_phi = 4;
    cfg.n_ei0_r = 4;
    cfg.n_du = 10;
    cfg.seed = 99;
    const GreedyResult a = run_apodg_ei(mini, sets, cfg);
    const GreedyResult b = run_apodg_ei(mini, sets, cfg);
    report("criterion 5h (deterministic replay)", histories_identical(a.history, b.history),
           fmt("%zu iterations replayed bit-identically", a.history.iterations.size()));
  }

  // ------------------------------------------------------------------- 6
  {
    const std::string ext_dir = (fs::path(work) / "external").string();
    const std::string ops_dir = (fs::path(ext_dir) / "operators").string();
    fs::create_directories(ops_dir);

    // Synthetic system exported to coordinate/vector text files.
    RunConfig block;
    block.geometry.kind = GeometryKind::Block;
    block.geometry.nx = 6;
    block.geometry.ny = 6;
    block.geometry.nz = 1;
    block.geometry.lengths = {10.0, 10.0, 1.0};
    block.d_iso = 0.1;
    block.dt = 2.0;
    block.n_steps = 150;
    block.protocol.kind = ProtocolKind::PlanarInitialCondition;
    block.parameters.gamma_range = {0.001, 0.01};
    block.parameters.samples = 12;
    block.parameters.train_fraction = 0.75;
    block.parameters.coarse_fraction = 0.5;
    block.parameters.seed = 31;
    block.greedy.tol = 0.05;
    block.greedy.max_iterations = 8;
    block.greedy.n_ei0_phi = 6;
    block.greedy.n_ei0_r = 6;
    block.greedy.svd_tol_phi = 1e-6;
    block.greedy.svd_tol_r = 1e-6;
    block.greedy.n_du = 12;
    block.greedy.seed = 31;
    block.threads = 1;
    block.greedy.threads = 1;

    const Discretization original = build_discretization(block);
    OperatorPaths paths;
    paths.mass = (fs::path(ops_dir) / "mass.mtx").string();
    paths.stiffness = (fs::path(ops_dir) / "stiffness.mtx").string();
    paths.input = (fs::path(ops_dir) / "input.txt").string();
    paths.output = (fs::path(ops_dir) / "output.txt").string();
    save_operators(paths, original.operators);
    write_index_file((fs::path(ops_dir) / "nodeset_left_edge.txt").string(),
                     original.node_sets.at("left_edge"));
    write_index_file((fs::path(ops_dir) / "nodeset_s2_region.txt").string(),
                     original.node_sets.at("s2_region"));

    RunConfig ext = block;
    ext.geometry.kind = GeometryKind::External;
    ext.geometry.operators = paths;
    ext.geometry.node_set_files["left_edge"] =
        (fs::path(ops_dir) / "nodeset_left_edge.txt").string();
    ext.geometry.node_set_files["s2_region"] =
        (fs::path(ops_dir) / "nodeset_s2_region.txt").string();
    ext.output_dir = (fs::path(ext_dir) / "out").string();

    const Discretization loaded = build_discretization(ext);
    const bool round_trip =
        loaded.operators.content_hash() == original.operators.content_hash();

    // Full pipeline through the installed command-line tool.
    const std::string ext_cfg = (fs::path(ext_dir) / "external_run.json").string();
    save_run_config(ext_cfg, ext);
    const std::string cli = CROM_CLI_PATH;
    bool pipeline = false;
    double cli_eps = -1.0;
    if (!cli.empty() && fs::exists(cli)) {
      const std::string greedy_out = (fs::path(ext_dir) / "greedy").string();
      const std::string validate_out = (fs::path(ext_dir) / "validate").string();
      const int rc1 = run_cli(cli, "greedy --config \"" + ext_cfg + "\" --out \"" +
                                       greedy_out + "\" --algorithm alg1");
      const int rc2 = run_cli(cli, "validate --config \"" + ext_cfg + "\" --rom \"" +
                                       greedy_out + "/rom.bin\" --out \"" + validate_out +
                                       "\"");
      pipeline = rc1 == 0 && rc2 == 0 && fs::exists(validate_out + "/validation.csv");
      std::ifstream summary(validate_out + "/summary.txt");
      std::string line;
      while (std::getline(summary, line)) {
        if (line.rfind("max_eps_rel=", 0) == 0) cli_eps = std::stod(line.substr(12));
      }
    }
    report("criterion 6 (external-operator stand-in)",
           round_trip && pipeline && cli_eps >= 0.0 && cli_eps < block.greedy.tol,
           fmt("hash round-trip=%d, CLI greedy+validate ok=%d, max_eps_rel=%.3e "
               "(LV figures not asserted: geometry unavailable)",
               (int)round_trip, (int)pipeline, cli_eps));
  }

  std::printf("%s: %d criterion check(s) failed\n", failures == 0 ? "OK" : "FAILED",
              failures);
  return failures == 0 ? 0 : 1;
}
