#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nlch {

/// Nodal values on a Grid (u, w, v, tangent vectors, ...), row-major with x fastest.
using Field = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform cell-centered box [0, length]^dim with zero-flux walls.
struct Grid {
  int dim = 1;
  int n = 8;
  double length = 1.0;
  double h = 0.125;

  Eigen::Index size() const { return dim == 1 ? Eigen::Index(n) : Eigen::Index(n) * n; }
  double cell_volume() const { return dim == 1 ? h : h * h; }
  double volume() const { return dim == 1 ? length : length * length; }

  /// Cell-center coordinate along one axis.
  double coord(int i) const { return (i + 0.5) * h; }

  std::array<double, 2> node(Eigen::Index k) const {
    if (dim == 1) return {coord(int(k)), 0.0};
    return {coord(int(k % n)), coord(int(k / n))};
  }

  bool operator==(const Grid& o) const {
    return dim == o.dim && n == o.n && length == o.length;
  }
};

Grid build_grid(int dim, int n, double length);

Field constant_field(const Grid& g, double value);

/// Calls fn(i, j, axis) once for every interior face, j being the +axis neighbour of i.
/// Boundary faces carry zero flux and are never visited.
template <typename Fn>
void for_each_face(const Grid& g, Fn&& fn) {
  const Eigen::Index n = g.n;
  if (g.dim == 1) {
    for (Eigen::Index i = 0; i + 1 < n; ++i) fn(i, i + 1, 0);
    return;
  }
  for (Eigen::Index y = 0; y < n; ++y)
    for (Eigen::Index x = 0; x + 1 < n; ++x) fn(y * n + x, y * n + x + 1, 0);
  for (Eigen::Index y = 0; y + 1 < n; ++y)
    for (Eigen::Index x = 0; x < n; ++x) fn(y * n + x, (y + 1) * n + x, 1);
}

inline void require_on_grid(const Grid& g, Eigen::Index size, const char* what) {
  if (size != g.size())
    throw Error(std::string(what) + ": field size " + std::to_string(size) +
                " does not match grid node count " + std::to_string(g.size()));
}

/// Second-order Neumann Laplacian, mirrored ghosts. Written as a face-flux
/// divergence so the weighted sum of the result telescopes to zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> laplacian_neumann(
    const Grid& g, const Eigen::MatrixBase<Derived>& f) {
  using Scalar = typename Derived::Scalar;
  require_on_grid(g, f.size(), "laplacian_neumann");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(f.size());
  const Scalar inv_h2 = Scalar(1) / Scalar(g.h * g.h);
  for_each_face(g, [&](Eigen::Index i, Eigen::Index j, int) {
    const Scalar flux = (f(j) - f(i)) * inv_h2;
    out(i) += flux;
    out(j) -= flux;
  });
  return out;
}

/// Discrete ∇·(μ(u)∇w): face flux μ_face (w_j − w_i)/h with μ_face the
/// arithmetic mean of the nodal mobilities.
Field div_mu_grad(const Grid& g, const Field& u, const Field& w);

/// Discrete ∇·(c ∇w) for a precomputed face coefficient c_face = coef(i, j).
template <typename Coef>
Field div_coef_grad(const Grid& g, const Field& w, Coef&& coef) {
  Field out = Field::Zero(w.size());
  const double inv_h2 = 1.0 / (g.h * g.h);
  for_each_face(g, [&](Eigen::Index i, Eigen::Index j, int) {
    const double flux = coef(i, j) * (w(j) - w(i)) * inv_h2;
    out(i) += flux;
    out(j) -= flux;
  });
  return out;
}

template <typename DA, typename DB>
double l2_inner(const Grid& g, const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return g.cell_volume() * a.dot(b);
}

template <typename Derived>
double l2_norm(const Grid& g, const Eigen::MatrixBase<Derived>& a) {
  return std::sqrt(g.cell_volume() * a.squaredNorm());
}

/// ‖∇f‖ over interior faces; boundary faces have zero normal derivative.
double h1_seminorm(const Grid& g, const Field& f);

/// Sum over nodes weighted by h^dim (∫_Ω f).
template <typename Derived>
double integrate(const Grid& g, const Eigen::MatrixBase<Derived>& f) {
  return g.cell_volume() * f.sum();
}

/// Nodal gradient (centered inside, one-sided at walls); one column per axis.
Eigen::MatrixXd node_gradient(const Grid& g, const Eigen::Ref<const Eigen::MatrixXd>& columns,
                              int axis);

}  // namespace nlch
