#pragma once

#include "nlch/grid.hpp"
#include "nlch/kernels.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace nlch {

/// Time series emitted by a run. All series share one length.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> min_u;
  std::vector<double> max_u;
  std::vector<double> l2_norm;
  std::vector<double> h1_seminorm;
  std::vector<double> energy;
  std::vector<double> dist_to_ref;  ///< NaN when no reference field is set
  std::vector<double> g_mean;       ///< mean of g(u) at the recorded state
  std::vector<long> clamp_events;

  std::size_t size() const { return times.size(); }
  bool consistent() const;
};

/// ū: node average.
double mass(const Field& u);

/// (k1, k2) = (min u, 1 − max u).
std::pair<double, double> separation(const Field& u);

/// ∫∫ K(x−y)(u(x)−u(y))² dx dy + ∫ f(u) with the assembled kernel and unit
/// weight on the entropy. A monitor only.
double energy(const Field& u, const KernelOp& op);

/// ∫ f(u) + ∫∫ K(x−y) u(x)(1−u(y)) dx dy, whose first variation is exactly
/// v = f'(u) + K∗(1−2u); nonincreasing along reaction-free trajectories.
double free_energy(const Field& u, const KernelOp& op);

/// max_k |ū_{k+1} − ū_k − Δt_k ḡ_k| / max(|ū_k|, |ū_{k+1}|), one entry per
/// step. Requires records taken every step.
double mass_balance_residual(const TrajectoryRecord& rec, const std::vector<double>& g_means);

struct ExponentialFit {
  double rate = 0.0;       ///< negated slope of log(values) vs t
  double intercept = 0.0;  ///< of log(values)
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit of log(values) against t on the closed window [t_a, t_b].
/// Throws when the window holds fewer than 10 samples or any value ≤ floor
/// ("converged below floor" when floor > 0).
ExponentialFit fit_exponential_rate(const std::vector<double>& times,
                                    const std::vector<double>& values, double t_a, double t_b,
                                    double floor = 0.0);

/// Same fit over the trailing fraction of the series (default last half).
ExponentialFit fit_trailing(const std::vector<double>& times, const std::vector<double>& values,
                            double fraction = 0.5, double floor = 0.0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Growth of a pair distance. c_sup is the sharpest C with d(t) ≤ e^{Ct} d(0)
/// over the samples; c_fit is the slope of a least-squares fit of log d, whose
/// RMS residual relative to the span of log d is relative_residual.
struct GrowthReport {
  double c_sup = 0.0;
  double c_fit = 0.0;
  double relative_residual = 0.0;
  bool finite = true;
};

GrowthReport distance_growth(const std::vector<double>& times, const std::vector<double>& distance);

}  // namespace nlch
