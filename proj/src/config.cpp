#include "crom/config.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "crom/errors.hpp"
#include "crom/mesh.hpp"

namespace crom {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (allowed.count(key) == 0) {
      throw ValidationError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

std::array<double, 3> get_triple(const json& obj, const std::string& key,
                                 const std::array<double, 3>& fallback,
                                 const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 3) {
    throw ValidationError("'" + key + "' in " + where + " must be a 3-element array");
  }
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

std::array<double, 2> get_pair(const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.size() != 2) {
    throw ValidationError("'" + what + "' must be a 2-element array");
  }
  return {arr[0].get<double>(), arr[1].get<double>()};
}

GeometryConfig parse_geometry(const json& j) {
  reject_unknown_keys(j, {"kind", "nx", "ny", "nz", "lengths", "operators", "node_sets"},
                      "geometry");
  GeometryConfig g;
  const std::string kind = get_or<std::string>(j, "kind", "block");
  if (kind == "block") {
    g.kind = GeometryKind::Block;
    g.nx = get_or<Index>(j, "nx", 1);
    g.ny = get_or<Index>(j, "ny", 1);
    g.nz = get_or<Index>(j, "nz", 1);
    g.lengths = get_triple(j, "lengths", {1.0, 1.0, 1.0}, "geometry");
  } else if (kind == "external") {
    g.kind = GeometryKind::External;
    if (!j.contains("operators")) {
      throw ValidationError("external geometry requires an 'operators' block");
    }
    const json& ops = j.at("operators");
    reject_unknown_keys(ops, {"mass", "stiffness", "input", "output"},
                        "geometry.operators");
    for (const char* key : {"mass", "stiffness", "input", "output"}) {
      if (!ops.contains(key)) {
        throw ValidationError(std::string("geometry.operators is missing '") + key + "'");
      }
    }
    g.operators.mass = ops.at("mass").get<std::string>();
    g.operators.stiffness = ops.at("stiffness").get<std::string>();
    g.operators.input = ops.at("input").get<std::string>();
    g.operators.output = ops.at("output").get<std::string>();
    if (j.contains("node_sets")) {
      for (const auto& [name, file] : j.at("node_sets").items()) {
        g.node_set_files[name] = file.get<std::string>();
      }
    }
  } else {
    throw ValidationError("geometry.kind must be 'block' or 'external'");
  }
  return g;
}

APParameters parse_ap(const json& j) {
  reject_unknown_keys(j,
                      {"beta_t", "beta_phi", "delta_phi", "c", "alpha", "b", "mu1",
                       "mu2", "gamma", "t_s"},
                      "physics.aliev_panfilov");
  APParameters p;
  p.beta_t = get_or(j, "beta_t", p.beta_t);
  p.beta_phi = get_or(j, "beta_phi", p.beta_phi);
  p.delta_phi = get_or(j, "delta_phi", p.delta_phi);
  p.c = get_or(j, "c", p.c);
  p.alpha = get_or(j, "alpha", p.alpha);
  p.b = get_or(j, "b", p.b);
  p.mu1 = get_or(j, "mu1", p.mu1);
  p.mu2 = get_or(j, "mu2", p.mu2);
  p.gamma = get_or(j, "gamma", p.gamma);
  p.t_s = get_or(j, "t_s", p.t_s);
  return p;
}

StimulusProtocol parse_protocol(const json& j) {
  reject_unknown_keys(
      j, {"kind", "amplitude", "s1_window", "s2_duration", "s1_node_set", "s2_node_set"},
      "protocol");
  StimulusProtocol p;
  const std::string kind = get_or<std::string>(j, "kind", "none");
  if (kind == "none") {
    p.kind = ProtocolKind::None;
  } else if (kind == "planar") {
    p.kind = ProtocolKind::PlanarInitialCondition;
  } else if (kind == "s1s2") {
    p.kind = ProtocolKind::S1S2Scroll;
  } else {
    throw ValidationError("protocol.kind must be 'none', 'planar' or 's1s2'");
  }
  p.amplitude = get_or(j, "amplitude", p.amplitude);
  p.s1_window = get_or(j, "s1_window", p.s1_window);
  p.s2_duration = get_or(j, "s2_duration", p.s2_duration);
  p.s1_node_set = get_or<std::string>(j, "s1_node_set", p.s1_node_set);
  p.s2_node_set = get_or<std::string>(j, "s2_node_set", p.s2_node_set);
  return p;
}

ParameterSpaceConfig parse_parameters(const json& j) {
  reject_unknown_keys(j,
                      {"gamma_range", "ts_range", "samples", "grid", "train_fraction",
                       "coarse_fraction", "seed"},
                      "parameters");
  ParameterSpaceConfig p;
  if (j.contains("gamma_range")) p.gamma_range = get_pair(j.at("gamma_range"), "gamma_range");
  if (j.contains("ts_range")) p.ts_range = get_pair(j.at("ts_range"), "ts_range");
  p.samples = get_or(j, "samples", p.samples);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_array() || g.size() != 2) {
      throw ValidationError("parameters.grid must be a 2-element array");
    }
    p.grid = {g[0].get<Index>(), g[1].get<Index>()};
  }
  p.train_fraction = get_or(j, "train_fraction", p.train_fraction);
  p.coarse_fraction = get_or(j, "coarse_fraction", p.coarse_fraction);
  p.seed = get_or(j, "seed", p.seed);
  if (!(p.train_fraction > 0.0) || p.train_fraction > 1.0) {
    throw ValidationError("parameters.train_fraction must lie in (0, 1]");
  }
  if (!(p.coarse_fraction > 0.0) || p.coarse_fraction > 1.0) {
    throw ValidationError("parameters.coarse_fraction must lie in (0, 1]");
  }
  return p;
}

GreedyConfig parse_greedy(const json& j) {
  reject_unknown_keys(j,
                      {"tol", "c_rb", "c_ei", "svd_tol_phi", "svd_tol_r", "n_ei0_phi",
                       "n_ei0_r", "max_iterations", "n_du", "n_add", "extra_ei_modes",
                       "rbf_kernel", "rbf_shape"},
                      "greedy");
  GreedyConfig g;
  g.tol = get_or(j, "tol", g.tol);
  g.c_rb = get_or(j, "c_rb", g.c_rb);
  g.c_ei = get_or(j, "c_ei", g.c_ei);
  g.svd_tol_phi = get_or(j, "svd_tol_phi", g.svd_tol_phi);
  g.svd_tol_r = get_or(j, "svd_tol_r", g.svd_tol_r);
  g.n_ei0_phi = get_or(j, "n_ei0_phi", g.n_ei0_phi);
  g.n_ei0_r = get_or(j, "n_ei0_r", g.n_ei0_r);
  g.max_iterations = get_or(j, "max_iterations", g.max_iterations);
  g.n_du = get_or(j, "n_du", g.n_du);
  g.n_add = get_or(j, "n_add", g.n_add);
  g.extra_ei_modes = get_or(j, "extra_ei_modes", g.extra_ei_modes);
  const std::string kernel = get_or<std::string>(j, "rbf_kernel", "thin_plate_spline");
  if (kernel == "thin_plate_spline") {
    g.rbf.kernel = RbfKernel::ThinPlateSpline;
  } else if (kernel == "gaussian") {
    g.rbf.kernel = RbfKernel::Gaussian;
  } else {
    throw ValidationError("greedy.rbf_kernel must be 'thin_plate_spline' or 'gaussian'");
  }
  g.rbf.shape = get_or(j, "rbf_shape", g.rbf.shape);
  return g;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config parse error in '" + path + "': " + e.what());
  }

  reject_unknown_keys(j,
                      {"geometry", "physics", "time", "protocol", "parameters", "greedy",
                       "classification", "output_dir", "threads"},
                      "config root");

  RunConfig cfg;
  if (!j.contains("geometry")) throw ValidationError("config is missing 'geometry'");
  cfg.geometry = parse_geometry(j.at("geometry"));

  if (j.contains("physics")) {
    const json& ph = j.at("physics");
    reject_unknown_keys(ph, {"d_iso", "flux_direction", "aliev_panfilov"}, "physics");
    cfg.d_iso = get_or(ph, "d_iso", cfg.d_iso);
    cfg.flux_direction = get_triple(ph, "flux_direction", cfg.flux_direction, "physics");
    if (ph.contains("aliev_panfilov")) cfg.ap = parse_ap(ph.at("aliev_panfilov"));
  }

  if (j.contains("time")) {
    const json& t = j.at("time");
    reject_unknown_keys(t, {"dt", "steps", "snapshot_stride"}, "time");
    cfg.dt = get_or(t, "dt", cfg.dt);
    cfg.n_steps = get_or(t, "steps", cfg.n_steps);
    cfg.snapshot_stride = get_or(t, "snapshot_stride", cfg.snapshot_stride);
  }

  if (j.contains("protocol")) cfg.protocol = parse_protocol(j.at("protocol"));
  if (j.contains("parameters")) cfg.parameters = parse_parameters(j.at("parameters"));
  if (j.contains("greedy")) cfg.greedy = parse_greedy(j.at("greedy"));

  if (j.contains("classification")) {
    const json& c = j.at("classification");
    reject_unknown_keys(c, {"tail_start", "threshold"}, "classification");
    cfg.classification.tail_start = get_or(c, "tail_start", cfg.classification.tail_start);
    cfg.classification.threshold = get_or(c, "threshold", cfg.classification.threshold);
  }

  cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir);
  cfg.threads = get_or(j, "threads", cfg.threads);
  cfg.greedy.seed = cfg.parameters.seed;
  cfg.greedy.threads = cfg.threads;
  return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  json j;
  json& geom = j["geometry"];
  if (cfg.geometry.kind == GeometryKind::Block) {
    geom["kind"] = "block";
    geom["nx"] = cfg.geometry.nx;
    geom["ny"] = cfg.geometry.ny;
    geom["nz"] = cfg.geometry.nz;
    geom["lengths"] = cfg.geometry.lengths;
  } else {
    geom["kind"] = "external";
    geom["operators"] = {{"mass", cfg.geometry.operators.mass},
                         {"stiffness", cfg.geometry.operators.stiffness},
                         {"input", cfg.geometry.operators.input},
                         {"output", cfg.geometry.operators.output}};
    if (!cfg.geometry.node_set_files.empty()) {
      geom["node_sets"] = cfg.geometry.node_set_files;
    }
  }

  j["physics"] = {{"d_iso", cfg.d_iso},
                  {"flux_direction", cfg.flux_direction},
                  {"aliev_panfilov",
                   {{"beta_t", cfg.ap.beta_t},
                    {"beta_phi", cfg.ap.beta_phi},
                    {"delta_phi", cfg.ap.delta_phi},
                    {"c", cfg.ap.c},
                    {"alpha", cfg.ap.alpha},
                    {"b", cfg.ap.b},
                    {"mu1", cfg.ap.mu1},
                    {"mu2", cfg.ap.mu2},
                    {"gamma", cfg.ap.gamma},
                    {"t_s", cfg.ap.t_s}}}};

  j["time"] = {{"dt", cfg.dt}, {"steps", cfg.n_steps}, {"snapshot_stride", cfg.snapshot_stride}};

  const char* kind = "none";
  if (cfg.protocol.kind == ProtocolKind::PlanarInitialCondition) kind = "planar";
  if (cfg.protocol.kind == ProtocolKind::S1S2Scroll) kind = "s1s2";
  j["protocol"] = {{"kind", kind},
                   {"amplitude", cfg.protocol.amplitude},
                   {"s1_window", cfg.protocol.s1_window},
                   {"s2_duration", cfg.protocol.s2_duration},
                   {"s1_node_set", cfg.protocol.s1_node_set},
                   {"s2_node_set", cfg.protocol.s2_node_set}};

  json& params = j["parameters"];
  params["gamma_range"] = cfg.parameters.gamma_range;
  if (cfg.parameters.ts_range) {
    params["ts_range"] = *cfg.parameters.ts_range;
    params["grid"] = cfg.parameters.grid;
  } else {
    params["samples"] = cfg.parameters.samples;
  }
  params["train_fraction"] = cfg.parameters.train_fraction;
  params["coarse_fraction"] = cfg.parameters.coarse_fraction;
  params["seed"] = cfg.parameters.seed;

  const char* kernel = cfg.greedy.rbf.kernel == RbfKernel::Gaussian ? "gaussian"
                                                                    : "thin_plate_spline";
  j["greedy"] = {{"tol", cfg.greedy.tol},
                 {"c_rb", cfg.greedy.c_rb},
                 {"c_ei", cfg.greedy.c_ei},
                 {"svd_tol_phi", cfg.greedy.svd_tol_phi},
                 {"svd_tol_r", cfg.greedy.svd_tol_r},
                 {"n_ei0_phi", cfg.greedy.n_ei0_phi},
                 {"n_ei0_r", cfg.greedy.n_ei0_r},
                 {"max_iterations", cfg.greedy.max_iterations},
                 {"n_du", cfg.greedy.n_du},
                 {"n_add", cfg.greedy.n_add},
                 {"extra_ei_modes", cfg.greedy.extra_ei_modes},
                 {"rbf_kernel", kernel},
                 {"rbf_shape", cfg.greedy.rbf.shape}};

  j["classification"] = {{"tail_start", cfg.classification.tail_start},
                         {"threshold", cfg.classification.threshold}};
  j["output_dir"] = cfg.output_dir;
  j["threads"] = cfg.threads;

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

Discretization build_discretization(const RunConfig& cfg) {
  Discretization d;
  if (cfg.geometry.kind == GeometryKind::Block) {
    const Mesh mesh = build_block_mesh(cfg.geometry.nx, cfg.geometry.ny, cfg.geometry.nz,
                                       cfg.geometry.lengths);
    d.operators = assemble_operators(mesh, cfg.d_iso, cfg.flux_direction, cfg.threads);
    d.node_sets = mesh.node_sets;
  } else {
    d.operators = load_operators(cfg.geometry.operators);
    for (const auto& [name, file] : cfg.geometry.node_set_files) {
      d.node_sets[name] = read_index_file(file);
    }
  }
  return d;
}

TrainingSets make_training_sets(const RunConfig& cfg) {
  const ParameterSpaceConfig& ps = cfg.parameters;
  std::vector<Parameter> pool;

  if (ps.ts_range) {
    if (ps.grid[0] < 1 || ps.grid[1] < 1) {
      throw ValidationError("parameters.grid counts must be at least 1");
    }
    for (Index i = 0; i < ps.grid[0]; ++i) {
      const double g = ps.grid[0] == 1
                           ? ps.gamma_range[0]
                           : ps.gamma_range[0] + (ps.gamma_range[1] - ps.gamma_range[0]) *
                                                     static_cast<double>(i) /
                                                     static_cast<double>(ps.grid[0] - 1);
      for (Index k = 0; k < ps.grid[1]; ++k) {
        const double ts =
            ps.grid[1] == 1
                ? (*ps.ts_range)[0]
                : (*ps.ts_range)[0] + ((*ps.ts_range)[1] - (*ps.ts_range)[0]) *
                                          static_cast<double>(k) /
                                          static_cast<double>(ps.grid[1] - 1);
        Parameter p(2);
        p << g, ts;
        pool.push_back(p);
      }
    }
  } else {
    if (ps.samples < 1) throw ValidationError("parameters.samples must be at least 1");
    for (Index i = 0; i < ps.samples; ++i) {
      const double g = ps.samples == 1
                           ? ps.gamma_range[0]
                           : ps.gamma_range[0] + (ps.gamma_range[1] - ps.gamma_range[0]) *
                                                     static_cast<double>(i) /
                                                     static_cast<double>(ps.samples - 1);
      Parameter p(1);
      p << g;
      pool.push_back(p);
    }
  }

  std::mt19937_64 rng(ps.seed);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  TrainingSets sets;
  const std::size_t n_train = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(ps.train_fraction *
                                               static_cast<double>(pool.size()))));
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_train) {
      sets.train.push_back(pool[order[i]]);
    } else {
      sets.test.push_back(pool[order[i]]);
    }
  }

  std::vector<std::size_t> train_order(sets.train.size());
  std::iota(train_order.begin(), train_order.end(), std::size_t{0});
  std::shuffle(train_order.begin(), train_order.end(), rng);
  const std::size_t n_coarse = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(ps.coarse_fraction *
                                               static_cast<double>(sets.train.size()))));
  for (std::size_t i = 0; i < train_order.size(); ++i) {
    if (i < n_coarse) {
      sets.coarse.push_back(sets.train[train_order[i]]);
    } else {
      sets.fine.push_back(sets.train[train_order[i]]);
    }
  }
  return sets;
}

FullOrderSystem build_fom_from_config(const RunConfig& cfg) {
  const Discretization d = build_discretization(cfg);
  return build_fom(d.operators, d.node_sets, cfg.ap, cfg.dt, cfg.n_steps, cfg.protocol);
}

}  // namespace crom
