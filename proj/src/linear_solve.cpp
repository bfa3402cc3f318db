#include "nlch/linear_solve.hpp"

#include <cmath>

namespace nlch {

CgReport solve_shifted_neumann(const Grid& g, double a, double c, const Field& b, Field& x,
                               double tol, int max_iter) {
  require_on_grid(g, b.size(), "solve_shifted_neumann");
  if (x.size() != b.size()) x = Field::Zero(b.size());
  if (a < 0.0 || !(c > 0.0)) throw Error("shifted Neumann solve needs a >= 0 and c > 0");

  const bool singular = (a == 0.0);
  Field rhs = b;
  double target_mean = 0.0;
  if (singular) {
    rhs.array() -= rhs.mean();
    target_mean = x.mean();
  }
  auto apply = [&](const Field& v) -> Field { return a * v - c * laplacian_neumann(g, v); };

  CgReport rep;
  const double bnorm = rhs.norm();
  if (bnorm == 0.0 && !singular) {
    x.setZero();
    rep.converged = true;
    return rep;
  }
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Field r = rhs - apply(x);
  if (singular) r.array() -= r.mean();
  double rr = r.squaredNorm();
  if (std::sqrt(rr) <= tol * scale) {
    rep.converged = true;
    rep.relative_residual = std::sqrt(rr) / scale;
  } else {
    Field p = r;
    for (int it = 1; it <= max_iter; ++it) {
      const Field ap = apply(p);
      const double alpha = rr / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      if (singular) r.array() -= r.mean();
      const double rr_next = r.squaredNorm();
      rep.iterations = it;
      rep.relative_residual = std::sqrt(rr_next) / scale;
      if (std::sqrt(rr_next) <= tol * scale) {
        rep.converged = true;
        break;
      }
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
  }
  if (singular) x.array() += target_mean - x.mean();
  return rep;
}

}  // namespace nlch
