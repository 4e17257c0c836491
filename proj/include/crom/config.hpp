#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crom/aliev_panfilov.hpp"
#include "crom/fom.hpp"
#include "crom/greedy.hpp"
#include "crom/operator_io.hpp"
#include "crom/types.hpp"

namespace crom {

enum class GeometryKind { Block, External };

struct GeometryConfig {
  GeometryKind kind = GeometryKind::Block;
  Index nx = 1, ny = 1, nz = 1;
  std::array<double, 3> lengths = {1.0, 1.0, 1.0};
  OperatorPaths operators;                         // external mode
  std::map<std::string, std::string> node_set_files;  // external mode, optional
};

struct ParameterSpaceConfig {
  std::array<double, 2> gamma_range = {0.0005, 0.01};
  std::optional<std::array<double, 2>> ts_range;  // presence makes the box 2-D
  Index samples = 100;                            // 1-D sample count
  std::array<Index, 2> grid = {6, 6};             // 2-D grid counts
  double train_fraction = 0.8;
  double coarse_fraction = 0.3;
  std::uint64_t seed = 0;
};

struct ClassificationConfig {
  double tail_start = 1200.0;  // [ms]
  double threshold = 0.05;     // fraction of the global |y| peak
};

struct RunConfig {
  GeometryConfig geometry;
  double d_iso = 0.1;
  std::array<double, 3> flux_direction = {1.0, 0.0, 0.0};
  APParameters ap;
  double dt = 2.0;
  Index n_steps = 250;
  Index snapshot_stride = 0;  // fom command: state dump cadence, 0 = off
  StimulusProtocol protocol;
  ParameterSpaceConfig parameters;
  GreedyConfig greedy;
  ClassificationConfig classification;
  std::string output_dir = "out";
  int threads = 1;
};

// Strict parse of the declarative run description: unknown keys anywhere are
// rejected, required keys must be present.
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& config);

// Operators + node sets for either geometry mode.
struct Discretization {
  AssembledOperators operators;
  std::map<std::string, std::vector<Index>> node_sets;
};
Discretization build_discretization(const RunConfig& config);

// Deterministic sampling of the parameter box and the train/test and
// coarse/fine splits, all driven by the config seed.
TrainingSets make_training_sets(const RunConfig& config);

FullOrderSystem build_fom_from_config(const RunConfig& config);

}  // namespace crom
