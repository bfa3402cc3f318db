#pragma once

#include "nlch/grid.hpp"

namespace nlch {

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Matrix-free CG for (a I − c Δ_h) x = b with a ≥ 0, c > 0 on the Neumann grid.
/// x holds the initial guess on entry. For a = 0 the operator is singular: b is
/// projected onto mean-zero fields and x keeps the mean of the initial guess.
CgReport solve_shifted_neumann(const Grid& g, double a, double c, const Field& b, Field& x,
                               double tol, int max_iter);

}  // namespace nlch
