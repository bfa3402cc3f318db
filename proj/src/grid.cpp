#include "nlch/grid.hpp"

#include "nlch/model.hpp"

namespace nlch {

Grid build_grid(int dim, int n, double length) {
  if (dim != 1 && dim != 2) throw Error("unsupported dimension " + std::to_string(dim));
  if (n < 8) throw Error("grid needs at least 8 nodes per axis, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw Error("domain length must be positive");
  return Grid{dim, n, length, length / n};
}

Field constant_field(const Grid& g, double value) { return Field::Constant(g.size(), value); }

Field div_mu_grad(const Grid& g, const Field& u, const Field& w) {
  require_on_grid(g, u.size(), "div_mu_grad(u)");
  require_on_grid(g, w.size(), "div_mu_grad(w)");
  const Field mu = u.unaryExpr([](double s) { return mobility(s); });
  return div_coef_grad(g, w, [&](Eigen::Index i, Eigen::Index j) { return 0.5 * (mu(i) + mu(j)); });
}

double h1_seminorm(const Grid& g, const Field& f) {
  require_on_grid(g, f.size(), "h1_seminorm");
  double acc = 0.0;
  for_each_face(g, [&](Eigen::Index i, Eigen::Index j, int) {
    const double d = f(j) - f(i);
    acc += d * d;
  });
  // face gradient (d/h)^2 weighted by h^dim
  return std::sqrt(acc * g.cell_volume() / (g.h * g.h));
}

Eigen::MatrixXd node_gradient(const Grid& g, const Eigen::Ref<const Eigen::MatrixXd>& columns,
                              int axis) {
  require_on_grid(g, columns.rows(), "node_gradient");
  const Eigen::Index n = g.n;
  const Eigen::Index stride = (axis == 0) ? 1 : n;
  Eigen::MatrixXd out(columns.rows(), columns.cols());
  for (Eigen::Index k = 0; k < columns.rows(); ++k) {
    const Eigen::Index pos = (axis == 0) ? (k % n) : (k / n);
    if (pos == 0) {
      out.row(k) = (columns.row(k + stride) - columns.row(k)) / g.h;
    } else if (pos == n - 1) {
      out.row(k) = (columns.row(k) - columns.row(k - stride)) / g.h;
    } else {
      out.row(k) = (columns.row(k + stride) - columns.row(k - stride)) / (2.0 * g.h);
    }
  }
  return out;
}

}  // namespace nlch
