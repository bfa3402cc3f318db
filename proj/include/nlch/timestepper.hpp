#pragma once

#include "nlch/diagnostics.hpp"
#include "nlch/kernels.hpp"
#include "nlch/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nlch {

enum class ClampPolicy { off, clamp_and_count };

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 1;
  double bound_tol = 1e-8;
  ClampPolicy clamp_policy = ClampPolicy::clamp_and_count;
  double cg_tol = 1e-10;
  int cg_max_iter = 10000;
  /// Excursions beyond this abort the run.
  double abort_tol = 1e-4;

  /// Throws unless dt > 0, t_end > 0, record_every ≥ 1, bound_tol < abort_tol
  /// and dt·lipschitz < ½.
  void validate(double reaction_lipschitz) const;
  long steps() const;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

struct State {
  double t0 = 0.0;
  double t = 0.0;
  Field u;
  Field w;  ///< K∗(1−2u), refreshed once per step
  long step_count = 0;
  long clamp_events = 0;
};

State make_state(Field u0, const KernelOp& op, double t0 = 0.0);

struct StepInfo {
  int cg_iterations = 0;
  double cg_residual = 0.0;
  double g_mean = 0.0;    ///< mean of g(u^n)
  double excursion = 0.0; ///< largest distance outside [0,1] before clamping
  long clamped_nodes = 0;
  bool warned = false;    ///< excursion exceeded bound_tol but stayed below abort_tol
};

/// One semi-implicit step: (I − dtΔ)u^{n+1} = u^n + dt ∇·(μ(u^n)∇w^n) + dt g(u^n),
/// solved by CG, followed by the zero-mean correction that makes
/// mean(u^{n+1}) = mean(u^n) + dt mean(g(u^n)) hold to round-off.
State step(const State& state, const ReactionSpec& spec, const KernelOp& op,
           const SolverConfig& cfg, StepInfo* info = nullptr);

struct RunOptions {
  std::optional<Field> reference;                  ///< for dist_to_ref
  std::function<void(const State&)> on_record;     ///< called at each record time
  bool record_energy = true;
};

struct RunResult {
  State state;
  TrajectoryRecord record;
  double max_mass_residual = 0.0;  ///< per-step relative defect of the mass identity
  double min_mass_increment = 0.0;
  double max_mass_increment = 0.0;
  long total_cg_iterations = 0;
  long warned_steps = 0;
  std::vector<std::string> warnings;
};

/// Requires 0 ≤ u0 ≤ 1 nodewise. Deterministic in its inputs.
RunResult run(const Field& u0, const ReactionSpec& spec, const KernelOp& op,
              const SolverConfig& cfg, const RunOptions& options = {});

struct PairResult {
  std::vector<double> times;
  std::vector<double> distance;  ///< ‖u1(t) − u2(t)‖_{L²}
  State first;
  State second;
  std::vector<std::string> warnings;
};

/// Advances two trajectories in lockstep and records their L² distance at every
/// record time.
PairResult pair_run(const Field& u01, const Field& u02, const ReactionSpec& spec,
                    const KernelOp& op, const SolverConfig& cfg);

}  // namespace nlch
