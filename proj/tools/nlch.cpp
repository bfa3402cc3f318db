// nlch <command> --config <path> [--out <dir>] [--seed <u64>]

#include "nlch/app.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal Cahn-Hilliard equation with reaction: simulation and verification"};
  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  app.add_option("command", command, "run | pair | equilibrium | remainder | trace")->required();
  app.add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.directory)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides initial.seed)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : nlch::kExitConfig;
  }

  nlch::RunConfig cfg;
  try {
    std::ifstream in(config_path);
    std::stringstream text;
    text << in.rdbuf();
    cfg = nlch::parse_config(text.str());
    cfg.command = nlch::parse_command(command);
  } catch (const nlch::Error& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return nlch::kExitConfig;
  }
  if (*out_opt) cfg.out_dir = out_dir;
  if (*seed_opt) cfg.seed = seed;
  return nlch::execute(cfg, std::cerr);
}
