#pragma once

#include <string>

#include "crom/rom.hpp"

namespace crom {

// Single-file binary ROM archive with a versioned header. Contains the dense
// reduced operators, the projection and hyperreduction bases with their
// interpolation indices, the residual factor, the frozen estimator state and
// build metadata (operator hash, dt, step count, tolerances).
void save_rom(const std::string& path, const ReducedModel& rom);
ReducedModel load_rom(const std::string& path);

}  // namespace crom
