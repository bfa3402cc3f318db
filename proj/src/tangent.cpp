#include "nlch/tangent.hpp"

#include "nlch/diagnostics.hpp"
#include "nlch/linear_solve.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nlch {

namespace {

/// linearized_explicit applied to every column of frame.
Eigen::MatrixXd explicit_columns(const Eigen::MatrixXd& frame, const Field& u, const Field& w,
                                 const ReactionSpec& spec, const KernelOp& op) {
  const Grid& g = op.grid();
  require_on_grid(g, frame.rows(), "linearized_explicit");
  require_on_grid(g, u.size(), "linearized_explicit(u)");
  const Field dg = reaction_deriv(spec, u);
  Eigen::MatrixXd out = dg.asDiagonal() * frame;
  if (op.is_zero()) return out;

  const Eigen::MatrixXd wt = op.convolve_columns(-2.0 * frame);
  const Field mu = u.unaryExpr([](double s) { return mobility(s); });
  const Field dmu = u.unaryExpr([](double s) { return mobility_prime(s); });
  const double inv_h2 = 1.0 / (g.h * g.h);
  for (Eigen::Index c = 0; c < frame.cols(); ++c) {
    auto U = frame.col(c);
    auto W = wt.col(c);
    auto o = out.col(c);
    for_each_face(g, [&](Eigen::Index i, Eigen::Index j, int) {
      const double flux = (0.5 * (dmu(i) * U(i) + dmu(j) * U(j)) * (w(j) - w(i)) +
                           0.5 * (mu(i) + mu(j)) * (W(j) - W(i))) *
                          inv_h2;
      o(i) += flux;
      o(j) -= flux;
    });
  }
  return out;
}

Field tangent_solve(const Grid& g, const Field& rhs, const Field& guess, const SolverConfig& cfg) {
  Field x = guess;
  const CgReport rep = solve_shifted_neumann(g, 1.0, cfg.dt, rhs, x, cfg.cg_tol, cfg.cg_max_iter);
  if (!rep.converged)
    throw SolverError("CG did not converge in the tangent step (relative residual " +
                      std::to_string(rep.relative_residual) + ")");
  x.array() += rhs.mean() - x.mean();
  return x;
}

}  // namespace

Field linearized_explicit(const Field& U, const Field& u, const Field& w, const ReactionSpec& spec,
                          const KernelOp& op) {
  return explicit_columns(U, u, w, spec, op).col(0);
}

Field linearized_operator(const Field& U, const Field& u, const Field& w,
                          const ReactionSpec& spec, const KernelOp& op) {
  return laplacian_neumann(op.grid(), U) + linearized_explicit(U, u, w, spec, op);
}

double quadratic_form(const Field& phi, const Field& u, const Field& w, const ReactionSpec& spec,
                      const KernelOp& op) {
  return l2_inner(op.grid(), linearized_operator(phi, u, w, spec, op), phi);
}

Field tangent_step(const Field& U, const Field& u, const Field& w, const ReactionSpec& spec,
                   const KernelOp& op, const SolverConfig& cfg) {
  const Field rhs = U + cfg.dt * linearized_explicit(U, u, w, spec, op);
  return tangent_solve(op.grid(), rhs, U, cfg);
}

Field propagate_tangent(const Field& u0, const Field& U0, const ReactionSpec& spec,
                        const KernelOp& op, const SolverConfig& cfg, double t) {
  SolverConfig c = cfg;
  c.t_end = t;
  c.validate(spec.lipschitz());
  State s = make_state(u0, op);
  Field U = U0;
  const long steps = c.steps();
  for (long n = 0; n < steps; ++n) {
    U = tangent_step(U, s.u, s.w, spec, op, c);
    s = step(s, spec, op, c);
  }
  return U;
}

RemainderResult remainder_order(const Field& u0, const Field& direction,
                                const std::vector<double>& eps_list, const ReactionSpec& spec,
                                const KernelOp& op, const SolverConfig& cfg, double t,
                                double exact_threshold) {
  if (eps_list.size() < 3) throw Error("need >= 3 points to fit");
  const Grid& g = op.grid();
  require_on_grid(g, direction.size(), "remainder_order(direction)");
  if (std::abs(l2_norm(g, direction) - 1.0) > 1e-8)
    throw Error("remainder_order: direction must be L2-normalized");

  SolverConfig c = cfg;
  c.t_end = t;
  c.cg_tol = std::min(cfg.cg_tol, 1e-13);
  c.cg_max_iter = std::max(cfg.cg_max_iter, 50000);
  c.validate(spec.lipschitz());

  RemainderResult res;
  // base trajectory and tangent in lockstep
  State base = make_state(u0, op);
  Field U = direction;
  const long steps = c.steps();
  for (long n = 0; n < steps; ++n) {
    U = tangent_step(U, base.u, base.w, spec, op, c);
    base = step(base, spec, op, c);
  }

  for (const double eps : eps_list) {
    const Field v0 = u0 + eps * direction;
    if (v0.minCoeff() < 0.0 || v0.maxCoeff() > 1.0) {
      res.warnings.push_back("skipping eps = " + std::to_string(eps) + ": perturbed datum leaves [0,1]");
      continue;
    }
    try {
      State v = make_state(v0, op);
      for (long n = 0; n < steps; ++n) v = step(v, spec, op, c);
      res.eps.push_back(eps);
      res.remainder.push_back(l2_norm(g, v.u - base.u - eps * U));
    } catch (const SolverError& e) {
      res.warnings.push_back("skipping eps = " + std::to_string(eps) + ": " + e.what());
    }
  }
  if (res.eps.size() < 3) throw Error("need >= 3 points to fit");

  if (std::all_of(res.remainder.begin(), res.remainder.end(),
                  [&](double r) { return r <= exact_threshold; })) {
    res.exact = true;
    return res;
  }
  std::vector<double> le, lr;
  for (std::size_t k = 0; k < res.eps.size(); ++k) {
    if (res.remainder[k] <= 0.0) continue;
    le.push_back(std::log(res.eps[k]));
    lr.push_back(std::log(res.remainder[k]));
  }
  if (le.size() < 3) throw Error("need >= 3 points to fit");
  const LinearFit fit = fit_line(le, lr);
  res.order = fit.slope;
  res.r_squared = fit.r_squared;
  return res;
}

Eigen::MatrixXd neumann_modes(const Grid& g, int count) {
  if (count < 0 || count > g.size()) throw Error("neumann_modes: count out of range");
  struct Mode {
    int kx, ky;
    double lambda;
  };
  std::vector<Mode> modes;
  auto eig = [&](int k) {
    const double s = std::sin(std::numbers::pi * k / (2.0 * g.n));
    return 4.0 * s * s / (g.h * g.h);
  };
  for (int ky = 0; ky < (g.dim == 2 ? g.n : 1); ++ky)
    for (int kx = 0; kx < g.n; ++kx) modes.push_back({kx, ky, eig(kx) + (g.dim == 2 ? eig(ky) : 0.0)});
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.lambda < b.lambda; });

  Eigen::MatrixXd out(g.size(), count);
  auto profile = [&](int k, int i) {
    const double amp = k == 0 ? std::sqrt(1.0 / g.length) : std::sqrt(2.0 / g.length);
    return amp * std::cos(std::numbers::pi * k * (i + 0.5) / g.n);
  };
  for (int c = 0; c < count; ++c)
    for (Eigen::Index p = 0; p < g.size(); ++p) {
      const int ix = int(p % g.n), iy = int(p / g.n);
      out(p, c) = profile(modes[c].kx, ix) * (g.dim == 2 ? profile(modes[c].ky, iy) : 1.0);
    }
  return out;
}

Eigen::VectorXd orthonormalize(const Grid& g, Eigen::MatrixXd& frame) {
  const double sw = std::sqrt(g.cell_volume());
  const Eigen::Index n = frame.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame * sw);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  Eigen::VectorXd logr(n);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(frame.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double d = r(j, j);
    if (!(std::abs(d) > 1e-12 * scale))
      throw Error("tangent frame lost rank at column " + std::to_string(j) +
                  "; reduce ortho_every");
    if (d < 0.0) q.col(j) = -q.col(j);
    logr(j) = std::log(std::abs(d));
  }
  frame = q / sw;
  return logr;
}

TraceCurve trace_curve(const Field& u0, int n_max, double T, const ReactionSpec& spec,
                       const KernelOp& op, const SolverConfig& cfg, const TraceConfig& tcfg) {
  const Grid& g = op.grid();
  if (n_max < 1 || n_max > g.size()) throw Error("trace: need 1 <= n <= node count");
  if (!(T >= 1.0)) throw Error("trace: horizon T must be at least 1");
  if (tcfg.ortho_every < 1) throw Error("trace: ortho_every must be at least 1");
  if (!(tcfg.transient >= 0.0) || tcfg.transient > T)
    throw Error("trace: transient window must lie in [0, T]");
  SolverConfig c = cfg;
  c.t_end = T;
  c.validate(spec.lipschitz());

  TraceCurve out;
  out.log_growth = Eigen::VectorXd::Zero(n_max);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_max);
  State s = make_state(u0, op);
  Eigen::MatrixXd frame = neumann_modes(g, n_max);
  const long steps = c.steps();
  for (long n = 0; n <= steps; ++n) {
    // The kernel term mixes modes and the stiff ones shrink by about 1/(1 + dt λ)
    // per step, so the frame collapses onto slow directions within a few steps
    // at large dt. The QR therefore runs every step; the trace samples depend only
    // on the span and are taken every ortho_every steps.
    const bool sample = n % tcfg.ortho_every == 0 || n == steps;
    out.log_growth += orthonormalize(g, frame);
    if (sample) {
      if (s.t >= tcfg.transient - 1e-12) {
        const Eigen::MatrixXd lf = explicit_columns(frame, s.u, s.w, spec, op);
        for (int j = 0; j < n_max; ++j) {
          const Field lap = laplacian_neumann(g, frame.col(j));
          sums(j) += g.cell_volume() * (lap + lf.col(j)).dot(frame.col(j));
        }
        out.sample_times.push_back(s.t);
      }
    }
    if (n == steps) break;
    const Eigen::MatrixXd ex = explicit_columns(frame, s.u, s.w, spec, op);
    for (int j = 0; j < n_max; ++j) {
      const Field rhs = frame.col(j) + c.dt * ex.col(j);
      frame.col(j) = tangent_solve(g, rhs, frame.col(j), c);
    }
    s = step(s, spec, op, c);
  }
  if (out.sample_times.empty()) throw Error("trace: no samples after the transient window");
  const double count = double(out.sample_times.size());
  out.trace.resize(n_max);
  double acc = 0.0;
  for (int j = 0; j < n_max; ++j) {
    acc += sums(j) / count;
    out.trace[j] = acc;
  }
  return out;
}

double trace_estimate(const Field& u0, int n, double T, const ReactionSpec& spec,
                      const KernelOp& op, const SolverConfig& cfg, const TraceConfig& tcfg) {
  return trace_curve(u0, n, T, spec, op, cfg, tcfg).trace.back();
}

DimensionBound dimension_bound(const std::vector<Field>& initial_data, int n_max, double T,
                               const ReactionSpec& spec, const KernelOp& op,
                               const SolverConfig& cfg, const TraceConfig& tcfg) {
  DimensionBound out;
  if (n_max <= 0) return out;
  if (initial_data.empty()) throw Error("dimension_bound: no initial data");
  out.curve.assign(n_max, -std::numeric_limits<double>::infinity());
  for (const Field& u0 : initial_data) {
    const TraceCurve tc = trace_curve(u0, n_max, T, spec, op, cfg, tcfg);
    for (int j = 0; j < n_max; ++j) out.curve[j] = std::max(out.curve[j], tc.trace[j]);
  }
  for (int j = 0; j < n_max; ++j)
    if (out.curve[j] < -tcfg.neg_tol) {
      out.n = j + 1;
      break;
    }
  if (out.n) {
    out.negative_beyond = std::all_of(out.curve.begin() + (*out.n - 1), out.curve.end(),
                                      [&](double v) { return v < -tcfg.neg_tol; });
  }
  return out;
}

}  // namespace nlch
