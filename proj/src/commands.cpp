#include "crom/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crom/csv.hpp"
#include "crom/errors.hpp"
#include "crom/estimator.hpp"
#include "crom/operator_io.hpp"
#include "crom/rom_io.hpp"
#include "crom/waveform.hpp"

namespace crom {

namespace {

namespace fs = std::filesystem;

std::string ensure_dir(const std::string& out_dir) {
  fs::create_directories(out_dir);
  return out_dir;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

class Summary {
 public:
  void set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    set(key, os.str());
  }
  void set(const std::string& key, Index value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) {
    set(key, std::string(value ? "true" : "false"));
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& [key, value] : entries_) out << key << "=" << value << "\n";
    for (const auto& [key, value] : entries_) {
      std::printf("%s=%s\n", key.c_str(), value.c_str());
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GreedyResult run_greedy_with_reports(const RunConfig& config, const std::string& out_dir,
                                     GreedyAlgorithm algorithm,
                                     const FullOrderSystem& fom, const TrainingSets& sets) {
  const std::string estimates_dir = join(out_dir, "estimates");
  fs::create_directories(estimates_dir);
  GreedyCallbacks cb;
  cb.on_iteration = [&](const GreedyIteration& it, const std::vector<Parameter>& samples,
                        const std::vector<double>& delta,
                        const std::vector<double>& delta_rb,
                        const std::vector<double>& delta_ei) {
    char name[64];
    std::snprintf(name, sizeof(name), "iteration_%02d.csv", it.iteration);
    write_estimate_csv(join(estimates_dir, name), samples, delta, delta_rb, delta_ei);
    std::printf("iter %d: eps=%.6g at gamma=%.6g%s n=%lld n_ei=%lld |train|=%lld (%.2fs)\n",
                it.iteration, it.epsilon, it.p_star[0],
                it.p_star.size() > 1
                    ? (" ts=" + std::to_string(it.p_star[1])).c_str()
                    : "",
                static_cast<long long>(it.n_phi + it.n_r),
                static_cast<long long>(it.n_ei_phi + it.n_ei_r),
                static_cast<long long>(it.train_size), it.seconds);
  };
  return algorithm == GreedyAlgorithm::Alg1 ? run_apodg_ei(fom, sets, config.greedy, cb)
                                            : run_apodg_ei_adapt(fom, sets, config.greedy, cb);
}

}  // namespace

int cmd_assemble(const RunConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  const Discretization d = build_discretization(config);

  OperatorPaths paths;
  paths.mass = join(out_dir, "mass.mtx");
  paths.stiffness = join(out_dir, "stiffness.mtx");
  paths.input = join(out_dir, "input.txt");
  paths.output = join(out_dir, "output.txt");
  save_operators(paths, d.operators);
  for (const auto& [name, nodes] : d.node_sets) {
    write_index_file(join(out_dir, "nodeset_" + name + ".txt"), nodes);
  }

  Summary summary;
  summary.set("dimension", d.operators.dimension);
  summary.set("nonzeros_mass", d.operators.mass.nonZeros());
  summary.set("nonzeros_stiffness", d.operators.stiffness.nonZeros());
  summary.set("operator_hash", std::to_string(d.operators.content_hash()));
  summary.set("mass_total", d.operators.mass.coeffs().sum());
  summary.write(join(out_dir, "summary.txt"));
  return 0;
}

int cmd_fom(const RunConfig& config, const std::string& out_dir,
            const std::optional<Parameter>& override_param) {
  ensure_dir(out_dir);
  const FullOrderSystem fom = build_fom_from_config(config);
  APParameters p = config.ap;
  if (override_param) p = with_parameter(config.ap, *override_param);

  FomSolveOptions opts;
  opts.record_states = config.snapshot_stride > 0;
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = solve_fom(fom, p, opts);
  const double elapsed = seconds_since(t0);

  write_flux_csv(join(out_dir, "flux.csv"), traj.outputs, fom.dt);
  if (config.snapshot_stride > 0) {
    for (Index k = 0; k <= fom.n_steps; k += config.snapshot_stride) {
      char name[64];
      std::snprintf(name, sizeof(name), "state_%06lld.txt", static_cast<long long>(k));
      write_vector_file(join(out_dir, name), traj.states.col(k));
    }
  }
  save_run_config(join(out_dir, "effective_config.json"), config);

  Summary summary;
  summary.set("gamma", p.gamma);
  summary.set("t_s", p.t_s);
  summary.set("steps", fom.n_steps);
  summary.set("seconds", elapsed);
  summary.set("peak_abs_flux", traj.outputs.size() ? traj.outputs.cwiseAbs().maxCoeff() : 0.0);
  summary.set("single_pulse", single_pulse_shape(traj.outputs));
  summary.write(join(out_dir, "summary.txt"));
  return 0;
}

int cmd_greedy(const RunConfig& config, const std::string& out_dir,
               GreedyAlgorithm algorithm) {
  ensure_dir(out_dir);
  const FullOrderSystem fom = build_fom_from_config(config);
  const TrainingSets sets = make_training_sets(config);

  const GreedyResult result = run_greedy_with_reports(config, out_dir, algorithm, fom, sets);

  save_rom(join(out_dir, "rom.bin"), result.rom);
  write_history_csv(join(out_dir, "history.csv"), result.history);
  save_run_config(join(out_dir, "effective_config.json"), config);

  Summary summary;
  summary.set("algorithm", std::string(algorithm == GreedyAlgorithm::Alg1 ? "alg1" : "alg2"));
  summary.set("converged", result.history.converged);
  summary.set("iterations", static_cast<Index>(result.history.iterations.size()));
  if (!result.history.iterations.empty()) {
    summary.set("final_epsilon", result.history.iterations.back().epsilon);
  }
  summary.set("n_phi", result.rom.basis.n_phi());
  summary.set("n_r", result.rom.basis.n_r());
  summary.set("n", result.rom.n());
  summary.set("n_ei", result.rom.hyper.n_ei());
  summary.set("seconds", result.history.total_seconds);
  summary.set("train_size", static_cast<Index>(sets.train.size()));
  summary.set("test_size", static_cast<Index>(sets.test.size()));
  summary.set("coarse_size_initial", static_cast<Index>(sets.coarse.size()));
  summary.write(join(out_dir, "summary.txt"));
  return 0;
}

int cmd_rom_eval(const RunConfig& config, const std::string& rom_path, const Parameter& p,
                 const std::string& out_dir) {
  ensure_dir(out_dir);
  const ReducedModel rom = load_rom(rom_path);
  const APParameters ap = with_parameter(rom.base_params, p);
  (void)config;

  const auto t0 = std::chrono::steady_clock::now();
  const RomTrajectory rt = solve_rom(rom, ap);
  const double elapsed = seconds_since(t0);

  write_flux_csv(join(out_dir, "rom_flux.csv"), rt.outputs, rom.dt);

  Summary summary;
  summary.set("gamma", ap.gamma);
  summary.set("t_s", ap.t_s);
  summary.set("n", rom.n());
  summary.set("seconds", elapsed);
  summary.set("peak_abs_flux", rt.outputs.size() ? rt.outputs.cwiseAbs().maxCoeff() : 0.0);
  summary.write(join(out_dir, "summary.txt"));
  return 0;
}

int cmd_validate(const RunConfig& config, const std::string& rom_path,
                 const std::string& out_dir) {
  ensure_dir(out_dir);
  const ReducedModel rom = load_rom(rom_path);
  const FullOrderSystem fom = build_fom_from_config(config);
  if (fom.operator_hash != rom.operator_hash) {
    throw ValidationError("ROM archive was built for different operators (hash " +
                          std::to_string(rom.operator_hash) + " vs " +
                          std::to_string(fom.operator_hash) + ")");
  }

  const TrainingSets sets = make_training_sets(config);
  EstimatorState est;
  est.rho_bar = rom.rho_bar;
  est.beta = rom.beta;
  est.dual_residual_norm = rom.dual_residual_norm;
  est.dual_lifted_norm = rom.dual_lifted_norm;

  std::vector<ValidationRow> rows;
  double worst_eps = 0.0;
  double min_speedup = 0.0;
  bool first = true;
  for (const Parameter& p : sets.test) {
    const APParameters ap = with_parameter(config.ap, p);

    const auto t_fom = std::chrono::steady_clock::now();
    FomSolveOptions fom_opts;
    fom_opts.record_states = false;
    const Trajectory traj = solve_fom(fom, ap, fom_opts);
    const double fom_seconds = seconds_since(t_fom);

    const auto t_rom = std::chrono::steady_clock::now();
    const RomTrajectory rt = solve_rom(rom, ap);
    const double rom_seconds = seconds_since(t_rom);

    const OutputMetrics m = metrics(traj.outputs, rt.outputs);
    const ErrorEstimate ee = error_estimate(rom, ap, est);

    ValidationRow row;
    row.p = p;
    row.eps_rel = m.eps_rel;
    row.delta_scaled = (ee.mean_rb + ee.mean_ei) / rom.estimator_scaling;
    row.fom_seconds = fom_seconds;
    row.rom_seconds = rom_seconds;
    row.speedup = rom_seconds > 0.0 ? fom_seconds / rom_seconds : 0.0;
    rows.push_back(row);

    worst_eps = std::max(worst_eps, m.eps_rel);
    min_speedup = first ? row.speedup : std::min(min_speedup, row.speedup);
    first = false;
  }

  write_validation_csv(join(out_dir, "validation.csv"), rows);

  Summary summary;
  summary.set("test_size", static_cast<Index>(rows.size()));
  summary.set("max_eps_rel", worst_eps);
  summary.set("min_speedup", min_speedup);
  summary.set("tol", rom.greedy_tol);
  summary.set("all_below_tol", rom.greedy_tol > 0.0 && worst_eps < rom.greedy_tol);
  summary.write(join(out_dir, "summary.txt"));
  return 0;
}

}  // namespace crom
