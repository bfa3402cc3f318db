#include "nlch/equilibrium.hpp"

#include "nlch/linear_solve.hpp"

#include <algorithm>
#include <cmath>

namespace nlch {

void EquilibriumConfig::validate() const {
  if (eps_schedule.empty()) throw Error("eps_schedule must not be empty");
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    if (!(eps_schedule[k] >= 0.0) || !std::isfinite(eps_schedule[k]))
      throw Error("eps_schedule entries must be finite and nonnegative");
    if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1]))
      throw Error("eps_schedule must be strictly decreasing");
  }
  if (!(damping > 0.0 && damping <= 1.0)) throw Error("damping must lie in (0, 1]");
  if (!(picard_tol > 0.0)) throw Error("picard_tol must be positive");
  if (max_iter < 1) throw Error("max_iter must be at least 1");
  if (!(dedup_tol > 0.0)) throw Error("dedup_tol must be positive");
}

double equilibrium_residual(const Field& u, const ReactionSpec& spec, const KernelOp& op) {
  const Grid& g = op.grid();
  require_on_grid(g, u.size(), "equilibrium_residual");
  const Field w = op.convolve(Field::Ones(u.size()) - 2.0 * u);
  Field r = -laplacian_neumann(g, u) - reaction_eval(spec, u);
  if (!op.is_zero()) r -= div_mu_grad(g, u, w);
  return l2_norm(g, r);
}

namespace {

/// One application of Γ_ε; x is the warm start on entry.
void apply_gamma(const Field& z, double eps, double shift, EpsilonAnchor anchor,
                 const ReactionSpec& spec, const KernelOp& op, const EquilibriumConfig& cfg,
                 Field& x) {
  const Grid& g = op.grid();
  const Field w = op.convolve(Field::Ones(z.size()) - 2.0 * z);
  const double anchor_eps = anchor == EpsilonAnchor::previous_iterate ? eps : 0.0;
  Field rhs = reaction_eval(spec, z) + (anchor_eps + shift) * z;
  if (!op.is_zero()) rhs += div_mu_grad(g, z, w);
  const double a = eps + shift;
  if (a == 0.0) x.array() += z.mean() - x.mean();  // compatibility shift: keep the mass of z
  const CgReport rep = solve_shifted_neumann(g, a, 1.0, rhs, x, cfg.cg_tol, cfg.cg_max_iter);
  if (!rep.converged)
    throw Error("equilibrium linear solve did not converge (relative residual " +
                std::to_string(rep.relative_residual) + ")");
}

}  // namespace

EquilibriumResult solve_equilibrium(const Field& u_init, const ReactionSpec& spec,
                                    const KernelOp& op, const EquilibriumConfig& cfg) {
  cfg.validate();
  const Grid& g = op.grid();
  require_on_grid(g, u_init.size(), "solve_equilibrium");
  if (!u_init.allFinite() || u_init.minCoeff() < 0.0 || u_init.maxCoeff() > 1.0)
    throw Error("solve_equilibrium needs 0 <= u_init <= 1");

  const double shift = spec.lipschitz();
  const double theta = cfg.damping;
  EquilibriumResult res;
  Field u = u_init;
  Field gamma = u;
  bool all_converged = true;
  for (const double eps : cfg.eps_schedule) {
    bool stage_converged = false;
    int it = 0;
    while (it < cfg.max_iter) {
      ++it;
      apply_gamma(u, eps, shift, cfg.anchor, spec, op, cfg, gamma);
      const Field next = (1.0 - theta) * u + theta * gamma;
      const double change = l2_norm(g, next - u);
      u = next;
      if (!u.allFinite()) throw Error("Picard iteration produced non-finite values");
      if (change < cfg.picard_tol) {
        stage_converged = true;
        break;
      }
    }
    res.iterations += it;
    res.stage_iterations.push_back(it);
    res.stage_limits.push_back(u);
    all_converged = all_converged && stage_converged;
  }
  res.converged = all_converged;

  // At ε = 0 a steady state exists only if the reaction has zero mean.
  if (cfg.eps_schedule.back() == 0.0) {
    const double defect = std::abs(reaction_eval(spec, u).mean());
    const double allowed = cfg.picard_tol * std::max(1.0, shift) / theta;
    res.compatibility_defect = defect > allowed;
  }

  res.max_excursion = std::max({0.0, -u.minCoeff(), u.maxCoeff() - 1.0});
  res.u = u.cwiseMax(0.0).cwiseMin(1.0);
  res.residual = equilibrium_residual(res.u, spec, op);
  return res;
}

std::vector<EquilibriumResult> multistart_equilibria(const std::vector<Field>& seeds,
                                                     const ReactionSpec& spec, const KernelOp& op,
                                                     const EquilibriumConfig& cfg) {
  std::vector<EquilibriumResult> kept;
  const Grid& g = op.grid();
  for (const Field& seed : seeds) {
    EquilibriumResult r = solve_equilibrium(seed, spec, op, cfg);
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const EquilibriumResult& k) {
      return l2_norm(g, k.u - r.u) <= cfg.dedup_tol;
    });
    if (!duplicate) kept.push_back(std::move(r));
  }
  return kept;
}

}  // namespace nlch
