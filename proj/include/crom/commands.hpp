#pragma once

#include <optional>
#include <string>

#include "crom/config.hpp"
#include "crom/greedy.hpp"

namespace crom {

enum class GreedyAlgorithm { Alg1, Alg2 };

// Batch entry points behind the CLI. Each writes its artifacts plus a
// machine-readable key=value summary (summary.txt, echoed to stdout) into
// out_dir and returns a process exit code.

int cmd_assemble(const RunConfig& config, const std::string& out_dir);

int cmd_fom(const RunConfig& config, const std::string& out_dir,
            const std::optional<Parameter>& override_param = {});

int cmd_greedy(const RunConfig& config, const std::string& out_dir,
               GreedyAlgorithm algorithm);

int cmd_rom_eval(const RunConfig& config, const std::string& rom_path,
                 const Parameter& p, const std::string& out_dir);

int cmd_validate(const RunConfig& config, const std::string& rom_path,
                 const std::string& out_dir);

}  // namespace crom
