#pragma once

#include "nlch/kernels.hpp"
#include "nlch/model.hpp"
#include "nlch/timestepper.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nlch {

/// Explicit part of the linearized flow at (u, w):
///   ∇·(μ'(u)∇w U + μ(u)∇w̃(U)) + g'(u)U,  w̃(U) = K∗(−2U),
/// in the flux form obtained by differentiating div_mu_grad face by face.
Field linearized_explicit(const Field& U, const Field& u, const Field& w, const ReactionSpec& spec,
                          const KernelOp& op);

/// Full linearized operator L(u) U = ΔU + linearized_explicit(U).
Field linearized_operator(const Field& U, const Field& u, const Field& w,
                          const ReactionSpec& spec, const KernelOp& op);

/// (L φ, φ)_{L²} at the state (u, w).
double quadratic_form(const Field& phi, const Field& u, const Field& w, const ReactionSpec& spec,
                      const KernelOp& op);

/// Same splitting as step(): (I − dtΔ)U^{n+1} = U^n + dt·linearized_explicit(U^n),
/// plus the same mean correction, so this is the derivative of the discrete step.
Field tangent_step(const Field& U, const Field& u, const Field& w, const ReactionSpec& spec,
                   const KernelOp& op, const SolverConfig& cfg);

/// Λ(t)U0: propagates U0 along the trajectory from u0 up to time t (t/dt steps).
Field propagate_tangent(const Field& u0, const Field& U0, const ReactionSpec& spec,
                        const KernelOp& op, const SolverConfig& cfg, double t);

struct RemainderResult {
  std::vector<double> eps;        ///< amplitudes actually used
  std::vector<double> remainder;  ///< ‖S(t)(u0+εd) − S(t)u0 − εΛ(t)d‖
  std::optional<double> order;    ///< empty when the flow is affine ("exact")
  double r_squared = 1.0;
  bool exact = false;
  std::vector<std::string> warnings;
};

/// Fits log R(ε) against log ε. Needs at least three admissible amplitudes.
/// Linear solves run at cg_tol ≤ 1e-13 so round-off stays below the remainder.
RemainderResult remainder_order(const Field& u0, const Field& direction,
                                const std::vector<double>& eps_list, const ReactionSpec& spec,
                                const KernelOp& op, const SolverConfig& cfg, double t,
                                double exact_threshold = 1e-10);

struct TraceConfig {
  int ortho_every = 10;      ///< steps between trace samples (the frame is re-orthonormalized every step)
  double transient = 1.0;    ///< samples before this time are discarded
  double neg_tol = 1e-8;     ///< "negative" means below −neg_tol
};

/// Discrete Neumann cosine modes, L²-orthonormal, by increasing eigenvalue.
Eigen::MatrixXd neumann_modes(const Grid& g, int count);

/// QR re-orthonormalization in the discrete L² inner product. Returns log|R_jj|.
/// Throws on rank loss.
Eigen::VectorXd orthonormalize(const Grid& g, Eigen::MatrixXd& frame);

struct TraceCurve {
  std::vector<double> trace;  ///< trace[n−1] = ⟨Tr(L P⁽ⁿ⁾)⟩ for n = 1..n_max
  std::vector<double> sample_times;
  Eigen::VectorXd log_growth;  ///< accumulated log R_jj per frame vector
};

/// Evolves an n_max-column frame along the trajectory from u0 up to T and time
/// averages Σ_{j≤n}(Lφ_j, φ_j) over the samples with t ≥ transient. Frames are
/// nested, so one propagation yields the curve for every n ≤ n_max.
TraceCurve trace_curve(const Field& u0, int n_max, double T, const ReactionSpec& spec,
                       const KernelOp& op, const SolverConfig& cfg, const TraceConfig& tcfg = {});

double trace_estimate(const Field& u0, int n, double T, const ReactionSpec& spec,
                      const KernelOp& op, const SolverConfig& cfg, const TraceConfig& tcfg = {});

struct DimensionBound {
  std::optional<int> n;       ///< smallest n with a negative trace, empty if none ≤ n_max
  std::vector<double> curve;  ///< worst (largest) trace over the sampled initial data
  bool negative_beyond = false;  ///< every n ≥ N in the curve is negative
};

/// Scans n = 1..n_max; the supremum over the attractor is approximated by the
/// maximum over the supplied initial data.
DimensionBound dimension_bound(const std::vector<Field>& initial_data, int n_max, double T,
                               const ReactionSpec& spec, const KernelOp& op,
                               const SolverConfig& cfg, const TraceConfig& tcfg = {});

}  // namespace nlch
