#include "nlch/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nlch {

std::string describe(const KernelSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianKernel>)
          os << "gaussian(c=" << k.c << ", lambda=" << k.lambda << ")";
        else if constexpr (std::is_same_v<T, MollifierKernel>)
          os << "mollifier(c=" << k.c << ", h=" << k.h_cut << ")";
        else
          os << "newton(dim=" << k.dim << ", k=" << k.k << ")";
      },
      spec);
  return os.str();
}

double kernel_value(const KernelSpec& spec, double r) {
  return std::visit(
      [r](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          return k.c * std::exp(-r * r / k.lambda);
        } else if constexpr (std::is_same_v<T, MollifierKernel>) {
          if (r >= k.h_cut) return 0.0;
          const double h2 = k.h_cut * k.h_cut;
          return k.c * std::exp(-h2 / (h2 - r * r));
        } else {
          if (k.dim == 2) return -k.k * std::log(r);
          return k.k * std::pow(r, 2.0 - k.dim);
        }
      },
      spec);
}

double newton_cell_average(double k, double h) {
  // ∫_0^1∫_0^1 ln(x²+y²) dx dy = ln 2 − 3 + π/2, rescaled to half-side h/2
  const double unit_mean_log_r = 0.5 * (std::log(2.0) - 3.0 + std::numbers::pi / 2.0);
  return -k * (std::log(0.5 * h) + unit_mean_log_r);
}

namespace {

void validate(const KernelSpec& spec, const Grid& grid) {
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianKernel>) {
          if (!(k.c >= 0.0) || !(k.lambda > 0.0))
            throw Error("gaussian kernel needs c >= 0 and lambda > 0");
        } else if constexpr (std::is_same_v<T, MollifierKernel>) {
          if (!(k.c >= 0.0) || !(k.h_cut > 0.0))
            throw Error("mollifier kernel needs c >= 0 and h > 0");
        } else {
          if (k.dim < 2) throw Error("newton potential is only defined for dim >= 2");
          if (k.dim != grid.dim)
            throw Error("newton potential dimension does not match the grid dimension");
          if (!(k.k > 0.0)) throw Error("newton constant must be positive");
        }
      },
      spec);
}

}  // namespace

KernelOp::KernelOp(Grid grid, Eigen::MatrixXd weights)
    : grid_(grid), weights_(std::move(weights)) {
  if (weights_.rows() != grid_.size() || weights_.cols() != grid_.size())
    throw Error("kernel weights must be N x N with N the grid node count");
  if (!weights_.allFinite()) throw Error("kernel weights must be finite");
  kbar_ = weights_.rowwise().sum();
  zero_ = (weights_.array() == 0.0).all();
}

KernelOp KernelOp::zero(const Grid& grid) {
  return KernelOp(grid, Eigen::MatrixXd::Zero(grid.size(), grid.size()));
}

Field KernelOp::convolve(const Eigen::Ref<const Field>& rho) const {
  require_on_grid(grid_, rho.size(), "convolve");
  if (zero_) return Field::Zero(rho.size());
  return weights_ * rho;
}

Eigen::MatrixXd KernelOp::convolve_columns(const Eigen::Ref<const Eigen::MatrixXd>& rho) const {
  require_on_grid(grid_, rho.rows(), "convolve_columns");
  if (zero_) return Eigen::MatrixXd::Zero(rho.rows(), rho.cols());
  return weights_ * rho;
}

KernelOp KernelOp::scaled(double a) const { return KernelOp(grid_, a * weights_); }

KernelOp assemble_kernel(const KernelSpec& spec, const Grid& grid) {
  validate(spec, grid);
  const Eigen::Index n = grid.size();
  const double vol = grid.cell_volume();
  const bool singular = std::holds_alternative<NewtonKernel>(spec);
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = grid.node(i);
    for (Eigen::Index j = i; j < n; ++j) {
      double value;
      if (i == j && singular) {
        const auto& nk = std::get<NewtonKernel>(spec);
        value = newton_cell_average(nk.k, grid.h) * vol;
      } else {
        const auto xj = grid.node(j);
        const double r = std::hypot(xi[0] - xj[0], xi[1] - xj[1]);
        value = kernel_value(spec, r) * vol;
      }
      if (!std::isfinite(value))
        throw Error("kernel evaluation is not finite for nodes " + std::to_string(i) + ", " +
                    std::to_string(j));
      w(i, j) = value;
      w(j, i) = value;
    }
  }
  return KernelOp(grid, std::move(w));
}

Field convolve(const KernelOp& op, const Eigen::Ref<const Field>& rho) { return op.convolve(rho); }

KernelConstants kernel_constants(const KernelOp& op, int max_iter, double tol) {
  KernelConstants out;
  if (op.is_zero()) return out;
  const Grid& g = op.grid();
  const Eigen::MatrixXd& w = op.weights();
  const Eigen::Index n = g.size();

  out.k2_sup = w.cwiseAbs().rowwise().sum().maxCoeff();

  // r∞: W^{1,∞} row sums of the operator and of its nodal gradient.
  const Eigen::Index stride_y = g.n;
  double rinf = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    auto grad_row = [&](int axis) -> Eigen::RowVectorXd {
      const Eigen::Index stride = axis == 0 ? 1 : stride_y;
      const Eigen::Index pos = axis == 0 ? k % g.n : k / g.n;
      if (pos == 0) return (w.row(k + stride) - w.row(k)) / g.h;
      if (pos == g.n - 1) return (w.row(k) - w.row(k - stride)) / g.h;
      return (w.row(k + stride) - w.row(k - stride)) / (2.0 * g.h);
    };
    Eigen::RowVectorXd gx = grad_row(0);
    double row = w.row(k).cwiseAbs().sum();
    if (g.dim == 1) {
      row += gx.cwiseAbs().sum();
    } else {
      Eigen::RowVectorXd gy = grad_row(1);
      row += (gx.array().square() + gy.array().square()).sqrt().sum();
    }
    rinf = std::max(rinf, row);
  }
  out.rinf_est = rinf;

  // r2: largest singular value of ρ ↦ (Wρ, ∇Wρ), i.e. sqrt of the top
  // eigenvalue of W (I − Δ_h) W. Deterministic start vector.
  Field x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.25 * std::sin(1.0 + 0.7 * double(i));
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Field wx = w * x;
    const Field y = w * (wx - laplacian_neumann(g, wx));
    const double next = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) {
      lambda = 0.0;
      break;
    }
    x = y / ny;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  out.r2_est = std::sqrt(std::max(lambda, 0.0));
  return out;
}

}  // namespace nlch
