#include "doctest.h"

#include "nlch/app.hpp"
#include "nlch/equilibrium.hpp"
#include "nlch/timestepper.hpp"

#include <cmath>

using namespace nlch;

namespace {

const Grid kG = build_grid(1, 64, 1.0);

double drift_under_flow(const Field& u, const ReactionSpec& spec, const KernelOp& op, double dt) {
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.t_end = 1.0;
  return l2_norm(op.grid(), run(u, spec, op, cfg).state.u - u);
}

}  // namespace

TEST_CASE("symmetric constant state with no reaction") {
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.05}, kG);
  const EquilibriumResult r = solve_equilibrium(constant_field(kG, 0.5), ReactionSpec::none(kG.size()), op);
  CHECK(r.converged);
  CHECK((r.u.array() - 0.5).abs().maxCoeff() == 0.0);
  CHECK(r.stage_iterations.front() == 1);
  CHECK(r.residual <= 1e-12);
}

TEST_CASE("three-root reaction: each constant is its own equilibrium") {
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.01}, kG);
  const ReactionSpec spec = three_root_reaction(kG.size(), 1.0);
  for (double c : {0.0, 0.5, 1.0}) {
    const EquilibriumResult r = solve_equilibrium(constant_field(kG, c), spec, op);
    CHECK(r.converged);
    CHECK(r.residual < 1e-10);
    CHECK((r.u.array() - c).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("oono: the unique equilibrium is 0, matching long-time integration") {
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.01}, kG);
  const ReactionSpec spec = ReactionSpec::oono(Field::Constant(kG.size(), 1.0));
  const Field seed = random_field(kG, 3, 0.0, 1.0);
  const EquilibriumResult r = solve_equilibrium(seed, spec, op);
  CHECK(r.converged);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 40.0;
  const Field late = run(seed, spec, op, cfg).state.u;
  CHECK(l2_norm(kG, r.u - late) <= 1e-12 + 1e-10);
  CHECK(r.u.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("equilibrium residual examples") {
  const KernelOp op = assemble_kernel(MollifierKernel{5.0, 0.1}, kG);
  CHECK(equilibrium_residual(constant_field(kG, 0.5), ReactionSpec::none(kG.size()), op) <= 1e-12);
  CHECK(equilibrium_residual(constant_field(kG, 0.0), ReactionSpec::logistic(Field::Constant(kG.size(), 1.0)), op) <= 1e-12);
  // zero kernel: only g(0.3) = 0.21 remains, and the domain has unit volume
  CHECK(equilibrium_residual(constant_field(kG, 0.3), ReactionSpec::logistic(Field::Constant(kG.size(), 1.0)),
                             KernelOp::zero(kG)) == doctest::Approx(0.21).epsilon(1e-12));
}

TEST_CASE("converged solves are certified") {
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.01}, kG);
  const double beta = contraction_threshold(kernel_constants(op)) + 2.0;
  const std::vector<ReactionSpec> specs{
      ReactionSpec::bertozzi(Field::Constant(kG.size(), beta), Field::Constant(kG.size(), 0.3)),
      ReactionSpec::logistic(Field::Constant(kG.size(), 1.0)),
      ReactionSpec::oono(Field::Constant(kG.size(), 2.0))};
  for (const auto& spec : specs) {
    const EquilibriumResult r = solve_equilibrium(random_field(kG, 9, 0.0, 1.0), spec, op);
    REQUIRE(r.converged);
    CHECK(r.residual < 1e-8);
    CHECK(r.u.minCoeff() >= 0.0);
    CHECK(r.u.maxCoeff() <= 1.0 + 1e-8);
    CHECK_FALSE(r.compatibility_defect);
    CHECK(drift_under_flow(r.u, spec, op, 1e-3) <= 10.0 * 1e-3);
  }
}

TEST_CASE("multistart deduplication") {
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.01}, kG);
  const auto three = multistart_equilibria(
      {constant_field(kG, 0.0), constant_field(kG, 0.5), constant_field(kG, 1.0)},
      three_root_reaction(kG.size(), 1.0), op);
  CHECK(three.size() == 3);

  const double beta = contraction_threshold(kernel_constants(op)) + 2.0;
  std::vector<Field> seeds;
  for (std::uint64_t s = 1; s <= 5; ++s) seeds.push_back(random_field(kG, s, 0.0, 1.0));
  const auto one = multistart_equilibria(
      seeds, ReactionSpec::bertozzi(Field::Constant(kG.size(), beta), Field::Constant(kG.size(), 0.6)), op);
  CHECK(one.size() == 1);

  CHECK(multistart_equilibria({}, ReactionSpec::none(kG.size()), op).empty());
}

TEST_CASE("origin anchor: stage limits follow the regularized constants") {
  // Zero kernel, logistic alpha: the eps-problem eps u = alpha u (1-u) has the
  // constant solution u = 1 - eps/alpha.
  const double alpha = 2.0;
  EquilibriumConfig cfg;
  cfg.anchor = EpsilonAnchor::origin;
  cfg.eps_schedule = {1.0, 0.5, 0.25, 0.125, 0.0};
  const EquilibriumResult r = solve_equilibrium(constant_field(kG, 0.4),
                                                ReactionSpec::logistic(Field::Constant(kG.size(), alpha)),
                                                KernelOp::zero(kG), cfg);
  CHECK(r.converged);
  REQUIRE(r.stage_limits.size() == 5);
  for (std::size_t k = 0; k < cfg.eps_schedule.size(); ++k) {
    const double expect = 1.0 - cfg.eps_schedule[k] / alpha;
    CHECK((r.stage_limits[k].array() - expect).abs().maxCoeff() <= 1e-8);
  }
  // consecutive limits differ by exactly the eps gap over alpha, so they
  // approach each other as the schedule refines
  for (std::size_t k = 0; k + 1 < r.stage_limits.size(); ++k) {
    const double gap = l2_norm(kG, r.stage_limits[k + 1] - r.stage_limits[k]);
    CHECK(gap == doctest::Approx((cfg.eps_schedule[k] - cfg.eps_schedule[k + 1]) / alpha).epsilon(1e-6));
  }
}

TEST_CASE("non-convergence is flagged, not thrown") {
  EquilibriumConfig cfg;
  cfg.max_iter = 2;
  const EquilibriumResult r = solve_equilibrium(random_field(kG, 4, 0.2, 0.8),
                                                ReactionSpec::logistic(Field::Constant(kG.size(), 1.0)),
                                                assemble_kernel(GaussianKernel{1.0, 0.01}, kG), cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.compatibility_defect);
  CHECK(r.iterations == 10);
}

TEST_CASE("configuration and input validation") {
  const KernelOp op = KernelOp::zero(kG);
  const ReactionSpec none = ReactionSpec::none(kG.size());
  EquilibriumConfig cfg;
  cfg.eps_schedule = {0.1, 1.0};
  CHECK_THROWS_AS(solve_equilibrium(constant_field(kG, 0.5), none, op, cfg), Error);
  cfg = {};
  cfg.damping = 0.0;
  CHECK_THROWS_AS(solve_equilibrium(constant_field(kG, 0.5), none, op, cfg), Error);
  cfg = {};
  cfg.eps_schedule = {1.0, -0.5};
  CHECK_THROWS_AS(solve_equilibrium(constant_field(kG, 0.5), none, op, cfg), Error);
  CHECK_THROWS_AS(solve_equilibrium(constant_field(kG, 1.5), none, op), Error);
}
