#include "doctest.h"

#include "nlch/kernels.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace nlch;

namespace {

// Composite Simpson rule on [a, b] with m (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int m) {
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

double gaussian_conv_exact(double x, double c, double lambda, double length) {
  return simpson([&](double y) { return c * std::exp(-(x - y) * (x - y) / lambda) * std::cos(std::numbers::pi * y / length); },
                 0.0, length, 20000);
}

double conv_error(int n) {
  const double c = 1.0, lambda = 0.05, length = 1.0;
  const Grid g = build_grid(1, n, length);
  const KernelOp op = assemble_kernel(GaussianKernel{c, lambda}, g);
  Field rho(n);
  for (int i = 0; i < n; ++i) rho(i) = std::cos(std::numbers::pi * g.coord(i) / length);
  const Field out = op.convolve(rho);
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    err = std::max(err, std::abs(out(i) - gaussian_conv_exact(g.coord(i), c, lambda, length)));
  return err;
}

}  // namespace

TEST_CASE("gaussian kernel: symmetric, positive, boundary mass loss") {
  const Grid g = build_grid(1, 32, 1.0);
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 1.0}, g);
  const auto& w = op.weights();
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.minCoeff() > 0.0);
  CHECK(op.kbar()(g.n / 2) > op.kbar()(0));
  CHECK(op.kbar()(g.n / 2) > op.kbar()(g.n - 1));
  CHECK(w(3, 7) == doctest::Approx(std::exp(-std::pow(4 * g.h, 2)) * g.h).epsilon(1e-14));
}

TEST_CASE("kbar equals row sums") {
  const Grid g = build_grid(2, 10, 1.0);
  const KernelOp op = assemble_kernel(GaussianKernel{2.0, 0.1}, g);
  const Field rows = op.weights().rowwise().sum();
  CHECK((rows - op.kbar()).cwiseAbs().maxCoeff() <= 1e-12 * rows.cwiseAbs().maxCoeff());
}

TEST_CASE("mollifier has compact support") {
  const Grid g = build_grid(1, 64, 1.0);
  const double cut = 0.25;
  const KernelOp op = assemble_kernel(MollifierKernel{1.0, cut}, g);
  int inside = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double r = std::abs(g.coord(i) - g.coord(j));
      if (r >= cut)
        CHECK(op.weights()(i, j) == 0.0);
      else
        inside += op.weights()(i, j) > 0.0;
    }
  CHECK(inside > 0);
}

TEST_CASE("mollifier mass: interior row sums approach the analytic mass") {
  const double c = 1.0, cut = 0.1;
  const double mass = simpson(
      [&](double x) { return std::abs(x) < cut ? c * std::exp(-cut * cut / (cut * cut - x * x)) : 0.0; },
      -cut, cut, 200000);
  const Grid g = build_grid(1, 1024, 2.0);
  const KernelOp op = assemble_kernel(MollifierKernel{c, cut}, g);
  const KernelConstants kc = kernel_constants(op, 50);
  CHECK(kc.k2_sup <= mass * (1.0 + 1e-6));
  CHECK(op.kbar()(g.n / 2) == doctest::Approx(mass).epsilon(1e-6));
  CHECK(op.kbar()(0) < 0.75 * mass);
}

TEST_CASE("newton potential: diagonal is the analytic cell average") {
  // Oracle: ln 2 − 3 + π/2 equals ∫_0^1 [ln(x²+1) − 2 + 2x atan(1/x)] dx, the inner
  // y-integral of ln(x²+y²) over [0,1] done by hand.
  const double inner = simpson(
      [](double x) { return x == 0.0 ? std::log(1.0) - 2.0 : std::log(x * x + 1.0) - 2.0 + 2.0 * x * std::atan(1.0 / x); },
      0.0, 1.0, 2000);
  CHECK(inner == doctest::Approx(std::log(2.0) - 3.0 + std::numbers::pi / 2.0).epsilon(1e-10));

  // Independent brute-force midpoint average of −k ln|x| over the cell.
  const double k = 1.7, h = 0.05;
  const int m = 1000;
  double acc = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double x = (a + 0.5) / m * 0.5 * h, y = (b + 0.5) / m * 0.5 * h;
      acc += -k * 0.5 * std::log(x * x + y * y);
    }
  const double brute = acc / (double(m) * m);
  CHECK(newton_cell_average(k, h) == doctest::Approx(brute).epsilon(1e-5));

  const Grid g = build_grid(2, 20, 1.0);
  const KernelOp op = assemble_kernel(NewtonKernel{2, k}, g);
  CHECK(op.weights().allFinite());
  for (Eigen::Index i = 0; i < g.size(); i += 37)
    CHECK(op.weights()(i, i) == doctest::Approx(newton_cell_average(k, g.h) * g.cell_volume()).epsilon(1e-14));
  CHECK((op.weights() - op.weights().transpose()).cwiseAbs().maxCoeff() == 0.0);
  // off-diagonal entries are the midpoint values −k ln r · h²
  CHECK(op.weights()(0, 1) == doctest::Approx(-k * std::log(g.h) * g.cell_volume()));
}

TEST_CASE("newton potential is rejected in 1D and on mismatched grids") {
  CHECK_THROWS_WITH_AS(assemble_kernel(NewtonKernel{1, 1.0}, build_grid(1, 16, 1.0)),
                       doctest::Contains("dim >= 2"), Error);
  CHECK_THROWS_AS(assemble_kernel(NewtonKernel{2, 1.0}, build_grid(1, 16, 1.0)), Error);
  CHECK_THROWS_AS(assemble_kernel(NewtonKernel{2, -1.0}, build_grid(2, 16, 1.0)), Error);
  CHECK_THROWS_AS(assemble_kernel(GaussianKernel{1.0, 0.0}, build_grid(1, 16, 1.0)), Error);
  CHECK_THROWS_AS(assemble_kernel(GaussianKernel{-1.0, 1.0}, build_grid(1, 16, 1.0)), Error);
  CHECK_THROWS_AS(assemble_kernel(MollifierKernel{1.0, 0.0}, build_grid(1, 16, 1.0)), Error);
}

TEST_CASE("convolve examples") {
  const Grid g = build_grid(1, 40, 1.0);
  const KernelOp op = assemble_kernel(GaussianKernel{1.5, 0.02}, g);
  CHECK((op.convolve(Field::Ones(g.size())) - op.kbar()).cwiseAbs().maxCoeff() <= 1e-14);

  // scaled indicator extracts the kernel profile around x_j
  const int j = 13;
  Field e = Field::Zero(g.size());
  e(j) = 1.0 / g.cell_volume();
  const Field col = convolve(op, e);
  for (int i = 0; i < g.n; ++i)
    CHECK(col(i) == doctest::Approx(1.5 * std::exp(-std::pow(g.coord(i) - g.coord(j), 2) / 0.02)).epsilon(1e-12));

  // reflection symmetry about the center is preserved
  Field rho(g.size());
  for (int i = 0; i < g.n; ++i) rho(i) = std::pow(g.coord(i) - 0.5, 2);
  const Field out = op.convolve(rho);
  for (int i = 0; i < g.n; ++i) CHECK(std::abs(out(i) - out(g.n - 1 - i)) <= 1e-12 * out.cwiseAbs().maxCoeff());
}

TEST_CASE("convolution is linear") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> d;
  const Grid g = build_grid(2, 12, 1.0);
  const KernelOp op = assemble_kernel(MollifierKernel{2.0, 0.3}, g);
  for (int trial = 0; trial < 10; ++trial) {
    Field a(g.size()), b(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      a(i) = d(rng);
      b(i) = d(rng);
    }
    const double s = d(rng), t = d(rng);
    const Field lhs = op.convolve(s * a + t * b);
    const Field rhs = s * op.convolve(a) + t * op.convolve(b);
    CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("midpoint quadrature converges at second order") {
  const double e16 = conv_error(16), e32 = conv_error(32), e64 = conv_error(64);
  CHECK(e16 / e32 >= 3.5);
  CHECK(e32 / e64 >= 3.5);
}

TEST_CASE("kernel constants: zero kernel and amplitude scaling") {
  const Grid g = build_grid(1, 64, 1.0);
  const KernelConstants z = kernel_constants(assemble_kernel(GaussianKernel{0.0, 0.1}, g));
  CHECK(z.r2_est == 0.0);
  CHECK(z.rinf_est == 0.0);
  CHECK(z.k2_sup == 0.0);
  CHECK(assemble_kernel(GaussianKernel{0.0, 0.1}, g).is_zero());

  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.01}, g);
  const KernelConstants a = kernel_constants(op), b = kernel_constants(op.scaled(2.0));
  CHECK(b.r2_est == doctest::Approx(2.0 * a.r2_est).epsilon(1e-10));
  CHECK(b.rinf_est == doctest::Approx(2.0 * a.rinf_est).epsilon(1e-12));
  CHECK(b.k2_sup == doctest::Approx(2.0 * a.k2_sup).epsilon(1e-12));
  CHECK(a.rinf_est > a.k2_sup);
  CHECK(contraction_threshold(b) == doctest::Approx(4.0 * contraction_threshold(a)).epsilon(1e-9));
}

TEST_CASE("r2 estimate matches a dense eigen-decomposition") {
  const Grid g = build_grid(1, 48, 1.0);
  const KernelOp op = assemble_kernel(GaussianKernel{1.0, 0.05}, g);
  const Eigen::MatrixXd& w = op.weights();
  Eigen::MatrixXd lap(g.size(), g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) lap.col(j) = laplacian_neumann(g, Field(Field::Unit(g.size(), j)));
  const Eigen::MatrixXd m = w * (Eigen::MatrixXd::Identity(g.size(), g.size()) - lap) * w;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const double expect = std::sqrt(es.eigenvalues().maxCoeff());
  CHECK(kernel_constants(op).r2_est == doctest::Approx(expect).epsilon(1e-8));
}
