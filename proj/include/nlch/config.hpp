#pragma once

#include "nlch/equilibrium.hpp"
#include "nlch/tangent.hpp"
#include "nlch/timestepper.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nlch {

enum class Command { run, pair, equilibrium, remainder, trace };

Command parse_command(const std::string& name);
std::string command_name(Command c);

struct KernelBlock {
  std::string family = "zero";  // gaussian | mollifier | newton | zero
  double c = 1.0;
  double lambda = 0.01;
  double h_cut = 0.1;
  double newton_k = 1.0;
};

struct ReactionBlock {
  std::string preset = "none";  // none | logistic | bertozzi | oono | three_root
  double alpha = 1.0;
  double beta = 1.0;
  double h = 0.5;
  double sigma = 1.0;
  double c = 1.0;
};

struct InitialBlock {
  std::string type = "constant";  // constant | cosine | random | file
  double value = 0.5;
  double amplitude = 0.1;
  int mode = 1;
  double lo = 0.0;
  double hi = 1.0;
  std::string path;
};

struct TangentBlock {
  int n_max = 20;
  double t_final = 5.0;
  int ortho_every = 10;
  double transient = 1.0;
  double neg_tol = 1e-8;
  int samples = 3;
  std::vector<double> eps_list{1e-2, 3e-3, 1e-3, 3e-4};
  double remainder_t = 1.0;
  int direction_mode = 1;
};

struct RunConfig {
  Command command = Command::run;
  int dim = 1;
  int n = 64;
  double length = 1.0;
  KernelBlock kernel;
  ReactionBlock reaction;
  SolverConfig solver;
  InitialBlock initial;
  std::uint64_t seed = 0;
  std::uint64_t pair_seed = 1;
  std::string out_dir = "out";
  int snapshot_every = 0;  ///< steps between field dumps, 0 = first and last only
  EquilibriumConfig equilibrium;
  std::vector<std::string> eq_seeds{"initial"};
  TangentBlock tangent;
  std::string reference = "none";  // none | zero | one | initial_mean
};

/// Parses `section.key = value` lines (`#` starts a comment) on top of the
/// defaults and validates the result. Unknown keys, malformed values and
/// out-of-range parameters raise Error with the offending line number.
RunConfig parse_config(const std::string& text);

/// Resolved configuration in the same grammar; parse_config(to_text(c))
/// reproduces c.
std::string to_text(const RunConfig& cfg);

/// Range checks shared by parse_config and command line overrides.
void validate(const RunConfig& cfg);

/// Lipschitz constant in s of the configured reaction preset.
double reaction_lipschitz(const ReactionBlock& r);

}  // namespace nlch
