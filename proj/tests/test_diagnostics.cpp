#include "doctest.h"

#include "nlch/app.hpp"
#include "nlch/diagnostics.hpp"
#include "nlch/timestepper.hpp"

#include <cmath>

using namespace nlch;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

double entropy_ref(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return s * std::log(s) + (1 - s) * std::log(1 - s);
}

}  // namespace

TEST_CASE("mass") {
  const Grid g = build_grid(1, 16, 3.0);
  CHECK(mass(constant_field(g, 0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  Field half = Field::Zero(g.size());
  half.head(8).setOnes();
  CHECK(mass(half) == 0.5);
  Field lin(g.size());
  for (int i = 0; i < g.n; ++i) lin(i) = g.coord(i) / g.length;
  CHECK(std::abs(mass(lin) - 0.5) <= 1e-12);
}

TEST_CASE("separation") {
  Field u(3);
  u << 0.2, 0.5, 0.7;
  const auto [k1, k2] = separation(u);
  CHECK(k1 == 0.2);
  CHECK(k2 == doctest::Approx(0.3));
  CHECK(separation(Field::Zero(4)) == std::pair<double, double>{0.0, 1.0});
  CHECK(separation(Field::Ones(4)) == std::pair<double, double>{1.0, 0.0});
}

TEST_CASE("energy examples and double-sum oracle") {
  const Grid g = build_grid(1, 24, 2.0);
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.1}, g);
  CHECK(energy(constant_field(g, 0.3), op) == doctest::Approx(g.volume() * entropy_ref(0.3)).epsilon(1e-12));
  CHECK(energy(constant_field(g, 0.5), op) == doctest::Approx(-g.volume() * std::log(2.0)).epsilon(1e-12));
  CHECK(energy(constant_field(g, 0.0), op) == 0.0);

  const Field u = random_field(g, 5, 0.0, 1.0);
  double pair = 0.0, local = 0.0;
  for (int i = 0; i < g.n; ++i) {
    local += entropy_ref(u(i));
    for (int j = 0; j < g.n; ++j) pair += op.weights()(i, j) * std::pow(u(i) - u(j), 2);
  }
  CHECK(energy(u, op) == doctest::Approx(g.h * (pair + local)).epsilon(1e-12));
}

TEST_CASE("free energy: double-sum oracle and first variation") {
  const Grid g = build_grid(1, 24, 1.0);
  const KernelOp op = assemble_kernel(MollifierKernel{3.0, 0.2}, g);
  const Field u = random_field(g, 6, 0.1, 0.9);
  double pair = 0.0, local = 0.0;
  for (int i = 0; i < g.n; ++i) {
    local += entropy_ref(u(i));
    for (int j = 0; j < g.n; ++j) pair += op.weights()(i, j) * u(i) * (1.0 - u(j));
  }
  CHECK(free_energy(u, op) == doctest::Approx(g.h * (pair + local)).epsilon(1e-12));

  // d/de F(u + e phi) = (v, phi) with v = f'(u) + K*(1 - 2u)
  const Field phi = random_field(g, 7, -1.0, 1.0);
  const double e = 1e-6;
  const double fd = (free_energy(u + e * phi, op) - free_energy(u - e * phi, op)) / (2.0 * e);
  const Field v = chemical_potential(u, op).v;
  CHECK(fd == doctest::Approx(l2_inner(g, v, phi)).epsilon(1e-6));
  CHECK(free_energy(constant_field(g, 0.3), KernelOp::zero(g)) == doctest::Approx(entropy_ref(0.3)));
}

TEST_CASE("mass balance residual") {
  const Grid g = build_grid(1, 32, 1.0);
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.02}, g);
  const Field u0 = random_field(g, 2, 0.0, 1.0);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;

  const RunResult none = run(u0, ReactionSpec::none(g.size()), op, cfg);
  CHECK(mass_balance_residual(none.record, none.record.g_mean) <= 1e-12);
  CHECK(std::abs(none.record.mass.back() - none.record.mass.front()) <= 1e-12 * none.record.mass.front());

  const double sigma = 2.0;
  const RunResult oono = run(u0, ReactionSpec::oono(Field::Constant(g.size(), sigma)), op, cfg);
  CHECK(mass_balance_residual(oono.record, oono.record.g_mean) <= 1e-12);
  for (std::size_t k = 0; k < oono.record.size(); k += 50)
    CHECK(oono.record.mass[k] == doctest::Approx(std::pow(1 - sigma * cfg.dt, double(k)) * u0.mean()).epsilon(1e-12));

  const RunResult lg = run(u0, ReactionSpec::logistic(Field::Constant(g.size(), 1.0)), op, cfg);
  CHECK(mass_balance_residual(lg.record, lg.record.g_mean) <= 1e-12);
  for (std::size_t k = 1; k < lg.record.size(); ++k) CHECK(lg.record.mass[k] > lg.record.mass[k - 1]);

  CHECK_THROWS_AS(mass_balance_residual(lg.record, {1.0}), Error);
}

TEST_CASE("exponential rate fits") {
  const auto t = linspace(0.0, 5.0, 51);
  std::vector<double> v, c, floor_hit;
  for (double x : t) {
    v.push_back(std::exp(-2.0 * x));
    c.push_back(0.7);
    floor_hit.push_back(std::max(std::exp(-10.0 * x), 1e-15));
  }
  const ExponentialFit f = fit_exponential_rate(t, v, 0.0, 5.0);
  CHECK(f.rate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.samples == 51);
  CHECK(std::abs(fit_exponential_rate(t, c, 0.0, 5.0).rate) <= 1e-14);
  CHECK_THROWS_WITH_AS(fit_exponential_rate(t, floor_hit, 0.0, 5.0, 1e-15), doctest::Contains("below floor"), Error);
  std::vector<double> neg = v;
  neg[40] = 0.0;
  CHECK_THROWS_WITH_AS(fit_exponential_rate(t, neg, 0.0, 5.0), doctest::Contains("nonpositive"), Error);
  CHECK_THROWS_AS(fit_exponential_rate(t, v, 0.0, 0.5), Error);  // 6 samples
  const ExponentialFit tail = fit_trailing(t, v);
  CHECK(tail.rate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(tail.samples == 26);
}

TEST_CASE("distance growth") {
  const auto t = linspace(0.0, 2.0, 41);
  std::vector<double> expo, super;
  for (double x : t) {
    expo.push_back(0.3 * std::exp(1.5 * x));
    super.push_back(0.3 * std::exp(3.0 * x * x * x));
  }
  const GrowthReport a = distance_growth(t, expo);
  CHECK(a.c_fit == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(a.c_sup == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(a.relative_residual <= 1e-10);
  CHECK(a.finite);
  CHECK(distance_growth(t, super).relative_residual > 0.05);
  std::vector<double> inf = expo;
  inf[5] = INFINITY;
  CHECK_FALSE(distance_growth(t, inf).finite);
}

TEST_CASE("line fit") {
  const LinearFit f = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1.0, 1.0}, {0.0, 1.0}), Error);
}

TEST_CASE("trajectory records are consistent") {
  const Grid g = build_grid(1, 16, 1.0);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.5;
  cfg.record_every = 7;
  RunOptions opt;
  opt.reference = constant_field(g, 0.0);
  const RunResult r = run(random_field(g, 1, 0.0, 1.0), ReactionSpec::oono(Field::Constant(g.size(), 1.0)),
                          KernelOp::zero(g), cfg, opt);
  CHECK(r.record.consistent());
  CHECK(r.record.times.back() == doctest::Approx(0.5));
  CHECK(r.record.size() == 9);  // t = 0, 7 multiples of 7 steps, final step
  for (std::size_t k = 0; k < r.record.size(); ++k) {
    CHECK(std::isfinite(r.record.energy[k]));
    CHECK(r.record.dist_to_ref[k] == doctest::Approx(r.record.l2_norm[k]));
  }
  TrajectoryRecord broken = r.record;
  broken.mass.pop_back();
  CHECK_FALSE(broken.consistent());
}
