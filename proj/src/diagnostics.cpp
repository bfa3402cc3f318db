#include "nlch/diagnostics.hpp"

#include "nlch/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlch {

bool TrajectoryRecord::consistent() const {
  const std::size_t n = times.size();
  if (mass.size() != n || min_u.size() != n || max_u.size() != n || l2_norm.size() != n ||
      h1_seminorm.size() != n || energy.size() != n || dist_to_ref.size() != n ||
      g_mean.size() != n || clamp_events.size() != n)
    return false;
  for (std::size_t k = 1; k < n; ++k)
    if (!(times[k] > times[k - 1])) return false;
  return true;
}

double mass(const Field& u) { return u.size() ? u.mean() : 0.0; }

std::pair<double, double> separation(const Field& u) {
  return {u.minCoeff(), 1.0 - u.maxCoeff()};
}

double energy(const Field& u, const KernelOp& op) {
  const Grid& g = op.grid();
  require_on_grid(g, u.size(), "energy");
  const double vol = g.cell_volume();
  double local = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) local += entropy(u(i));
  double pair = 0.0;
  if (!op.is_zero()) {
    // Σ_ij W_ij (u_i − u_j)² = 2 Σ_i k̄_i u_i² − 2 uᵀWu
    pair = 2.0 * (op.kbar().dot(u.cwiseProduct(u)) - u.dot(op.convolve(u)));
  }
  return vol * (pair + local);
}

double free_energy(const Field& u, const KernelOp& op) {
  const Grid& g = op.grid();
  require_on_grid(g, u.size(), "free_energy");
  double local = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) local += entropy(u(i));
  double pair = 0.0;
  if (!op.is_zero()) pair = u.dot(op.convolve(Field::Ones(u.size()) - u));
  return g.cell_volume() * (local + pair);
}

double mass_balance_residual(const TrajectoryRecord& rec, const std::vector<double>& g_means) {
  if (g_means.size() != rec.size()) throw Error("mass_balance_residual: series are not aligned");
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < rec.size(); ++k) {
    const double dt = rec.times[k + 1] - rec.times[k];
    const double defect = rec.mass[k + 1] - rec.mass[k] - dt * g_means[k];
    const double scale = std::max(std::abs(rec.mass[k]), std::abs(rec.mass[k + 1]));
    worst = std::max(worst, scale > 0.0 ? std::abs(defect) / scale : std::abs(defect));
  }
  return worst;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw Error("fit_line needs two aligned series of length >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - (fit.intercept + fit.slope * x[k]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.rms_residual = std::sqrt(ss_res / double(n));
  return fit;
}

ExponentialFit fit_exponential_rate(const std::vector<double>& times,
                                    const std::vector<double>& values, double t_a, double t_b,
                                    double floor) {
  if (times.size() != values.size()) throw Error("fit_exponential_rate: series are not aligned");
  std::vector<double> t, logv;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_a || times[k] > t_b) continue;
    if (!(values[k] > floor)) {
      if (floor > 0.0) throw Error("fit_exponential_rate: converged below floor");
      throw Error("fit_exponential_rate: nonpositive value in fit window");
    }
    t.push_back(times[k]);
    logv.push_back(std::log(values[k]));
  }
  if (t.size() < 10) throw Error("fit_exponential_rate: window needs at least 10 samples");
  const LinearFit line = fit_line(t, logv);
  return ExponentialFit{-line.slope, line.intercept, line.r_squared, t.size()};
}

ExponentialFit fit_trailing(const std::vector<double>& times, const std::vector<double>& values,
                            double fraction, double floor) {
  if (times.empty()) throw Error("fit_trailing: empty series");
  const double t0 = times.front(), t1 = times.back();
  return fit_exponential_rate(times, values, t1 - fraction * (t1 - t0), t1, floor);
}

GrowthReport distance_growth(const std::vector<double>& times,
                             const std::vector<double>& distance) {
  GrowthReport rep;
  if (times.size() != distance.size() || times.size() < 2)
    throw Error("distance_growth: need aligned series of length >= 2");
  const double d0 = distance.front();
  std::vector<double> t, logd;
  rep.c_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(distance[k])) {
      rep.finite = false;
      return rep;
    }
    if (!(distance[k] > 0.0)) continue;
    t.push_back(times[k]);
    logd.push_back(std::log(distance[k]));
    if (k > 0 && d0 > 0.0)
      rep.c_sup = std::max(rep.c_sup, std::log(distance[k] / d0) / (times[k] - times[0]));
  }
  if (t.size() < 2) {
    rep.c_sup = 0.0;
    return rep;
  }
  const LinearFit line = fit_line(t, logd);
  rep.c_fit = line.slope;
  const auto [lo, hi] = std::minmax_element(logd.begin(), logd.end());
  const double span = *hi - *lo;
  rep.relative_residual = span > 1e-12 ? line.rms_residual / span : 0.0;
  rep.finite = std::isfinite(rep.c_sup) && std::isfinite(rep.c_fit);
  return rep;
}

}  // namespace nlch
