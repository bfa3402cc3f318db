#include "nlch/timestepper.hpp"

#include "nlch/linear_solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nlch {

void SolverConfig::validate(double reaction_lipschitz) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error("t_end must be positive");
  if (record_every < 1) throw Error("record_every must be at least 1");
  if (!(bound_tol >= 0.0) || !(bound_tol < 1e-4)) throw Error("bound_tol must lie in [0, 1e-4)");
  if (!(abort_tol > bound_tol)) throw Error("abort_tol must exceed bound_tol");
  if (!(cg_tol > 0.0)) throw Error("cg_tol must be positive");
  if (cg_max_iter < 1) throw Error("cg_max_iter must be at least 1");
  if (!(dt * reaction_lipschitz < 0.5))
    throw Error("dt * reaction Lipschitz constant must stay below 1/2 (explicit reaction)");
}

long SolverConfig::steps() const { return std::max(1L, std::lround(t_end / dt)); }

State make_state(Field u0, const KernelOp& op, double t0) {
  require_on_grid(op.grid(), u0.size(), "make_state");
  if (!u0.allFinite()) throw Error("initial field must be finite");
  State s;
  s.t0 = t0;
  s.t = t0;
  s.w = op.convolve(Field::Ones(u0.size()) - 2.0 * u0);
  s.u = std::move(u0);
  return s;
}

State step(const State& state, const ReactionSpec& spec, const KernelOp& op,
           const SolverConfig& cfg, StepInfo* info) {
  const Grid& g = op.grid();
  const Field gu = reaction_eval(spec, state.u);
  Field rhs = state.u + cfg.dt * gu;
  if (!op.is_zero()) rhs += cfg.dt * div_mu_grad(g, state.u, state.w);

  State next;
  next.t0 = state.t0;
  next.step_count = state.step_count + 1;
  next.t = state.t0 + double(next.step_count) * cfg.dt;
  next.clamp_events = state.clamp_events;
  next.u = state.u;
  const CgReport cg = solve_shifted_neumann(g, 1.0, cfg.dt, rhs, next.u, cfg.cg_tol, cfg.cg_max_iter);
  if (!cg.converged) {
    std::ostringstream os;
    os << "CG did not converge at step " << next.step_count << " (relative residual "
       << cg.relative_residual << " after " << cg.iterations << " iterations)";
    throw SolverError(os.str());
  }
  // Constants are in the kernel of Δ_h: shifting by a constant restores the exact mean.
  next.u.array() += rhs.mean() - next.u.mean();

  const double lo = next.u.minCoeff(), hi = next.u.maxCoeff();
  const double excursion = std::max({0.0, -lo, hi - 1.0});
  StepInfo local;
  local.cg_iterations = cg.iterations;
  local.cg_residual = cg.relative_residual;
  local.g_mean = gu.mean();
  local.excursion = excursion;
  if (excursion > cfg.abort_tol) {
    std::ostringstream os;
    os << "phase bound excursion " << excursion << " at t = " << next.t
       << " exceeds the abort threshold; reduce dt";
    throw SolverError(os.str());
  }
  if (excursion > 0.0 && cfg.clamp_policy == ClampPolicy::clamp_and_count) {
    for (Eigen::Index i = 0; i < next.u.size(); ++i) {
      if (next.u(i) < 0.0 || next.u(i) > 1.0) {
        next.u(i) = std::clamp(next.u(i), 0.0, 1.0);
        ++local.clamped_nodes;
      }
    }
    next.clamp_events += local.clamped_nodes;
  }
  local.warned = excursion > cfg.bound_tol;
  next.w = op.convolve(Field::Ones(next.u.size()) - 2.0 * next.u);
  if (info) *info = local;
  return next;
}

namespace {

void append_record(TrajectoryRecord& rec, const State& s, const ReactionSpec& spec,
                   const KernelOp& op, const RunOptions& options) {
  const Grid& g = op.grid();
  rec.times.push_back(s.t);
  rec.mass.push_back(mass(s.u));
  rec.min_u.push_back(s.u.minCoeff());
  rec.max_u.push_back(s.u.maxCoeff());
  rec.l2_norm.push_back(l2_norm(g, s.u));
  rec.h1_seminorm.push_back(h1_seminorm(g, s.u));
  rec.energy.push_back(options.record_energy ? free_energy(s.u, op)
                                             : std::numeric_limits<double>::quiet_NaN());
  rec.dist_to_ref.push_back(options.reference ? l2_norm(g, s.u - *options.reference)
                                              : std::numeric_limits<double>::quiet_NaN());
  rec.g_mean.push_back(reaction_eval(spec, s.u).mean());
  rec.clamp_events.push_back(s.clamp_events);
}

void check_initial(const Field& u0, const ReactionSpec& spec, std::vector<std::string>& warnings) {
  if (!u0.allFinite()) throw Error("initial field must be finite");
  if (u0.minCoeff() < 0.0 || u0.maxCoeff() > 1.0)
    throw Error("initial field must satisfy 0 <= u0 <= 1 at every node");
  const double m = u0.mean();
  if ((m <= 0.0 || m >= 1.0)) {
    if (spec.is_zero())
      warnings.push_back("initial mean is a pure phase and g = 0 cannot move mass");
    else
      warnings.push_back("initial mean is a pure phase; relying on the reaction to move mass");
  }
}

}  // namespace

RunResult run(const Field& u0, const ReactionSpec& spec, const KernelOp& op,
              const SolverConfig& cfg, const RunOptions& options) {
  cfg.validate(spec.lipschitz());
  if (spec.size() != op.grid().size()) throw Error("reaction and kernel live on different grids");
  RunResult res;
  check_initial(u0, spec, res.warnings);
  if (options.reference) require_on_grid(op.grid(), options.reference->size(), "reference");

  State s = make_state(u0, op);
  append_record(res.record, s, spec, op, options);
  if (options.on_record) options.on_record(s);

  const long steps = cfg.steps();
  if (std::abs(double(steps) * cfg.dt - cfg.t_end) > 1e-9 * cfg.t_end)
    res.warnings.push_back("t_end is not a multiple of dt; running " + std::to_string(steps) +
                           " steps");
  res.min_mass_increment = std::numeric_limits<double>::infinity();
  res.max_mass_increment = -std::numeric_limits<double>::infinity();
  for (long n = 1; n <= steps; ++n) {
    StepInfo info;
    const double m_prev = mass(s.u);
    s = step(s, spec, op, cfg, &info);
    const double m_next = mass(s.u);
    const double inc = m_next - m_prev;
    const double scale = std::max(std::abs(m_prev), std::abs(m_next));
    const double defect = std::abs(inc - cfg.dt * info.g_mean);
    res.max_mass_residual = std::max(res.max_mass_residual, scale > 0.0 ? defect / scale : defect);
    res.min_mass_increment = std::min(res.min_mass_increment, inc);
    res.max_mass_increment = std::max(res.max_mass_increment, inc);
    res.total_cg_iterations += info.cg_iterations;
    if (info.warned) {
      if (res.warned_steps == 0) {
        std::ostringstream os;
        os << "phase bound excursion " << info.excursion << " above bound_tol at t = " << s.t;
        res.warnings.push_back(os.str());
      }
      ++res.warned_steps;
    }
    if (n % cfg.record_every == 0 || n == steps) {
      append_record(res.record, s, spec, op, options);
      if (options.on_record) options.on_record(s);
    }
  }
  res.state = std::move(s);
  return res;
}

PairResult pair_run(const Field& u01, const Field& u02, const ReactionSpec& spec,
                    const KernelOp& op, const SolverConfig& cfg) {
  cfg.validate(spec.lipschitz());
  PairResult res;
  check_initial(u01, spec, res.warnings);
  check_initial(u02, spec, res.warnings);
  const Grid& g = op.grid();
  State a = make_state(u01, op), b = make_state(u02, op);
  res.times.push_back(a.t);
  res.distance.push_back(l2_norm(g, a.u - b.u));
  const long steps = cfg.steps();
  for (long n = 1; n <= steps; ++n) {
    a = step(a, spec, op, cfg);
    b = step(b, spec, op, cfg);
    if (n % cfg.record_every == 0 || n == steps) {
      res.times.push_back(a.t);
      res.distance.push_back(l2_norm(g, a.u - b.u));
    }
  }
  res.first = std::move(a);
  res.second = std::move(b);
  return res;
}

}  // namespace nlch
