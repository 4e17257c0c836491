#pragma once

#include <string>
#include <vector>

#include "crom/greedy.hpp"
#include "crom/types.hpp"

namespace crom {

// CSV writers (UTF-8, header row). Values carry 17 significant digits.

void write_flux_csv(const std::string& path, const Vector& outputs, double dt);

void write_history_csv(const std::string& path, const GreedyHistory& history);

// Per-iteration estimator report over the evaluated training samples.
void write_estimate_csv(const std::string& path, const std::vector<Parameter>& samples,
                        const std::vector<double>& delta,
                        const std::vector<double>& delta_rb,
                        const std::vector<double>& delta_ei);

struct ValidationRow {
  Parameter p;
  double eps_rel = 0.0;
  double delta_scaled = 0.0;
  double fom_seconds = 0.0;
  double rom_seconds = 0.0;
  double speedup = 0.0;
};
void write_validation_csv(const std::string& path, const std::vector<ValidationRow>& rows);

}  // namespace crom
