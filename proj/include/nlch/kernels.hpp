#pragma once

#include "nlch/grid.hpp"

#include <Eigen/Dense>

#include <string>
#include <variant>

namespace nlch {

/// K(|x|) = c exp(−|x|²/λ). c = 0 gives the null kernel.
struct GaussianKernel {
  double c = 1.0;
  double lambda = 1.0;
};

/// K(|x|) = c exp(−h²/(h²−|x|²)) for |x| < h, zero beyond.
struct MollifierKernel {
  double c = 1.0;
  double h_cut = 0.25;
};

/// Newton potential: −k ln|x| for dim 2, k |x|^{2−dim} for dim > 2.
/// The constant k defaults to 1.
struct NewtonKernel {
  int dim = 2;
  double k = 1.0;
};

using KernelSpec = std::variant<GaussianKernel, MollifierKernel, NewtonKernel>;

std::string describe(const KernelSpec& spec);

/// Pointwise kernel profile K(r), r ≥ 0 (singular at 0 for the Newton family).
double kernel_value(const KernelSpec& spec, double r);

/// Average of −k ln|x| over the square cell [−h/2, h/2]².
double newton_cell_average(double k, double h);

/// Dense, exactly symmetric discrete convolution ρ ↦ Σ_j W_ij ρ_j with
/// W_ij ≈ K(|x_i − x_j|) h^dim, together with its row sums k̄.
class KernelOp {
 public:
  KernelOp(Grid grid, Eigen::MatrixXd weights);

  static KernelOp zero(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Field& kbar() const { return kbar_; }
  bool is_zero() const { return zero_; }

  Field convolve(const Eigen::Ref<const Field>& rho) const;
  /// Column-wise convolution of several densities at once.
  Eigen::MatrixXd convolve_columns(const Eigen::Ref<const Eigen::MatrixXd>& rho) const;

  /// A copy with every weight multiplied by a (K → aK).
  KernelOp scaled(double a) const;

 private:
  Grid grid_;
  Eigen::MatrixXd weights_;
  Field kbar_;
  bool zero_ = false;
};

KernelOp assemble_kernel(const KernelSpec& spec, const Grid& grid);

Field convolve(const KernelOp& op, const Eigen::Ref<const Field>& rho);

struct KernelConstants {
  double r2_est = 0.0;    ///< ‖K∗·‖ from L² to H¹, power iteration
  double rinf_est = 0.0;  ///< max_i Σ_j (|W_ij| + |∂W_ij|)
  double k2_sup = 0.0;    ///< max_i Σ_j |W_ij|
};

KernelConstants kernel_constants(const KernelOp& op, int max_iter = 2000, double tol = 1e-14);

/// ½ (r2/4 + r∞)²: the coupling constant a monotone reaction must beat for
/// trajectories to contract onto a unique equilibrium.
inline double contraction_threshold(const KernelConstants& kc) {
  const double a = kc.r2_est / 4.0 + kc.rinf_est;
  return 0.5 * a * a;
}

}  // namespace nlch
