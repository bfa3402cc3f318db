#pragma once

#include "nlch/kernels.hpp"
#include "nlch/model.hpp"

#include <vector>

namespace nlch {

/// Where the ε-term is anchored in the regularized problem.
///  - origin: −Δu + εu = ∇·(μ(z)∇w(z)) + g(z), the classic regularization;
///    its fixed points depend on ε.
///  - previous_iterate: −Δu + ε(u − z) = ∇·(μ(z)∇w(z)) + g(z); ε only
///    controls the step, every fixed point solves the unregularized problem.
enum class EpsilonAnchor { previous_iterate, origin };

struct EquilibriumConfig {
  std::vector<double> eps_schedule{1.0, 0.1, 0.01, 0.001, 0.0};
  double damping = 0.5;
  double picard_tol = 1e-10;
  int max_iter = 10000;
  double cg_tol = 1e-12;
  int cg_max_iter = 20000;
  EpsilonAnchor anchor = EpsilonAnchor::previous_iterate;
  double dedup_tol = 1e-6;

  void validate() const;
};

struct EquilibriumResult {
  Field u;
  bool converged = false;
  bool compatibility_defect = false;  ///< final stage: |mean g(u)| too large
  int iterations = 0;                 ///< total Picard iterations over all stages
  double residual = 0.0;              ///< equilibrium_residual of the returned field
  double max_excursion = 0.0;         ///< removed by the final clamp to [0,1]
  std::vector<Field> stage_limits;    ///< limit reached for each ε of the schedule
  std::vector<int> stage_iterations;
};

/// Damped Picard iteration u ← (1−θ)u + θ Γ_ε(u) for each ε of the schedule,
/// warm-started along the schedule. Γ_ε(z) solves
///   (−Δ + ε + s) u = ∇·(μ(z)∇K∗(1−2z)) + g(z) + (ε_a + s) z,
/// with s = Lip(g) a stabilizing shift that leaves fixed points unchanged and
/// ε_a = ε (previous_iterate anchor) or 0 (origin anchor).
EquilibriumResult solve_equilibrium(const Field& u_init, const ReactionSpec& spec,
                                    const KernelOp& op, const EquilibriumConfig& cfg = {});

/// ‖−Δ_h u − ∇·(μ(u)∇w) − g(u)‖_{L²} with w = K∗(1−2u).
double equilibrium_residual(const Field& u, const ReactionSpec& spec, const KernelOp& op);

/// Solves from every seed and keeps results farther than cfg.dedup_tol (L²)
/// from every result kept before them.
std::vector<EquilibriumResult> multistart_equilibria(const std::vector<Field>& seeds,
                                                     const ReactionSpec& spec, const KernelOp& op,
                                                     const EquilibriumConfig& cfg = {});

}  // namespace nlch
