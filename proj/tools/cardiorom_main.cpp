#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crom/commands.hpp"
#include "crom/config.hpp"
#include "crom/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration file")->required();
  cmd->add_option("--out", args.out_dir, "Output directory (default: config output_dir)");
  auto* seed = cmd->add_option("--seed", "Override the configured seed");
  seed->each([&args](const std::string& v) { args.seed = std::stoull(v); });
  auto* threads = cmd->add_option("--threads", "Worker thread count");
  threads->each([&args](const std::string& v) { args.threads = std::stoi(v); });
}

crom::RunConfig load_config(const CommonArgs& args) {
  crom::RunConfig config = crom::load_run_config(args.config_path);
  if (args.seed) {
    config.parameters.seed = *args.seed;
    config.greedy.seed = *args.seed;
  }
  if (args.threads) {
    config.threads = *args.threads;
    config.greedy.threads = *args.threads;
  }
  return config;
}

std::string resolve_out(const CommonArgs& args, const crom::RunConfig& config) {
  return args.out_dir.empty() ? config.output_dir : args.out_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified reduced-order models for cardiac monodomain simulation"};
  app.require_subcommand(1);

  CommonArgs assemble_args, fom_args, greedy_args, eval_args, validate_args;

  CLI::App* assemble = app.add_subcommand("assemble", "Assemble and export FEM operators");
  add_common(assemble, assemble_args);

  CLI::App* fom = app.add_subcommand("fom", "Solve the full-order model");
  add_common(fom, fom_args);
  double fom_gamma = -1.0, fom_ts = -1.0;
  fom->add_option("--gamma", fom_gamma, "Override gamma");
  fom->add_option("--ts", fom_ts, "Override the S2 stimulus start [ms]");

  CLI::App* greedy = app.add_subcommand("greedy", "Build a reduced model greedily");
  add_common(greedy, greedy_args);
  std::string algorithm = "alg1";
  greedy->add_option("--algorithm", algorithm, "alg1 (fixed training set) or alg2 (adaptive)")
      ->check(CLI::IsMember({"alg1", "alg2"}));

  CLI::App* rom_eval = app.add_subcommand("rom-eval", "Evaluate a ROM archive at a parameter");
  add_common(rom_eval, eval_args);
  std::string eval_rom;
  double eval_gamma = 0.0, eval_ts = -1.0;
  rom_eval->add_option("--rom", eval_rom, "ROM archive path")->required();
  rom_eval->add_option("--gamma", eval_gamma, "Parameter gamma")->required();
  rom_eval->add_option("--ts", eval_ts, "Parameter t_s [ms]");

  CLI::App* validate = app.add_subcommand("validate", "Validate a ROM on the test split");
  add_common(validate, validate_args);
  std::string validate_rom;
  validate->add_option("--rom", validate_rom, "ROM archive path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (assemble->parsed()) {
      const crom::RunConfig config = load_config(assemble_args);
      return crom::cmd_assemble(config, resolve_out(assemble_args, config));
    }
    if (fom->parsed()) {
      const crom::RunConfig config = load_config(fom_args);
      std::optional<crom::Parameter> override_param;
      if (fom->count("--gamma") > 0) {
        crom::Parameter p(fom->count("--ts") > 0 ? 2 : 1);
        p[0] = fom_gamma;
        if (p.size() > 1) p[1] = fom_ts;
        override_param = p;
      }
      return crom::cmd_fom(config, resolve_out(fom_args, config), override_param);
    }
    if (greedy->parsed()) {
      const crom::RunConfig config = load_config(greedy_args);
      const auto alg = algorithm == "alg1" ? crom::GreedyAlgorithm::Alg1
                                           : crom::GreedyAlgorithm::Alg2;
      return crom::cmd_greedy(config, resolve_out(greedy_args, config), alg);
    }
    if (rom_eval->parsed()) {
      const crom::RunConfig config = load_config(eval_args);
      crom::Parameter p(rom_eval->count("--ts") > 0 ? 2 : 1);
      p[0] = eval_gamma;
      if (p.size() > 1) p[1] = eval_ts;
      return crom::cmd_rom_eval(config, eval_rom, p, resolve_out(eval_args, config));
    }
    if (validate->parsed()) {
      const crom::RunConfig config = load_config(validate_args);
      return crom::cmd_validate(config, validate_rom, resolve_out(validate_args, config));
    }
  } catch (const crom::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
