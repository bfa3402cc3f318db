#pragma once

#include "nlch/grid.hpp"

#include <functional>
#include <string>
#include <variant>

namespace nlch {

class KernelOp;

/// μ(s) = s(1−s) on [0,1], zero outside.
inline double mobility(double s) { return (s >= 0.0 && s <= 1.0) ? s * (1.0 - s) : 0.0; }

/// dμ/ds, zero outside [0,1] (one-sided values at the end points).
inline double mobility_prime(double s) { return (s >= 0.0 && s <= 1.0) ? 1.0 - 2.0 * s : 0.0; }

inline constexpr double kDefaultGuard = 1e-12;

/// f'(s) = log(s/(1−s)) with s clamped to [guard, 1−guard].
double f_prime(double s, double guard = kDefaultGuard);

/// f(s) = s log s + (1−s) log(1−s), continuously extended by f(0) = f(1) = 0
/// and clamped to [0,1] outside.
double entropy(double s);

/// v = f'(u) + K∗(1−2u). Diagnostic only: the dynamics never evaluate f'.
struct ChemicalPotential {
  Field v;
  Eigen::Index guarded_nodes = 0;  ///< nodes where the log clamp was active
};
ChemicalPotential chemical_potential(const Field& u, const KernelOp& op,
                                     double guard = kDefaultGuard);

/// A reaction term g(x, s) together with ∂_s g. Immutable after validation;
/// g is extended constantly outside [0,1].
class ReactionSpec {
 public:
  using NodeFn = std::function<double(Eigen::Index, double)>;

  struct Logistic { Field alpha; };             ///< g = α u (1−u)
  struct Bertozzi { Field beta; Field target; };///< g = β (h − u)
  struct Oono { Field sigma; };                 ///< g = −σ u
  struct Custom { NodeFn g; NodeFn dg; };

  static ReactionSpec logistic(Field alpha);
  static ReactionSpec bertozzi(Field beta, Field target);
  static ReactionSpec oono(Field sigma);
  /// Caller supplies both g and ∂_s g plus a uniform Lipschitz bound in s.
  static ReactionSpec custom(Eigen::Index nodes, NodeFn g, NodeFn dg, double lipschitz_s,
                             std::string name = "custom");
  /// g ≡ 0.
  static ReactionSpec none(Eigen::Index nodes);

  double value(Eigen::Index node, double s) const;
  double derivative(Eigen::Index node, double s) const;

  Eigen::Index size() const { return nodes_; }
  double lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }
  bool is_zero() const { return zero_; }
  /// True when g(x, s) ≥ 0 (resp. ≤ 0) for every node and s ∈ [0,1], as far as
  /// the variant can tell analytically (custom reactions are sampled).
  bool nonnegative() const { return sign_ > 0 || zero_; }
  bool nonpositive() const { return sign_ < 0 || zero_; }

  const std::variant<Logistic, Bertozzi, Oono, Custom>& variant() const { return variant_; }

 private:
  ReactionSpec(std::variant<Logistic, Bertozzi, Oono, Custom> v, Eigen::Index nodes,
               double lipschitz, std::string name);
  void validate();

  std::variant<Logistic, Bertozzi, Oono, Custom> variant_;
  Eigen::Index nodes_ = 0;
  double lipschitz_ = 0.0;
  std::string name_;
  bool zero_ = false;
  int sign_ = 0;
};

Field reaction_eval(const ReactionSpec& spec, const Field& u);
Field reaction_deriv(const ReactionSpec& spec, const Field& u);

/// g(s) = c s (1−s)(1−2s): vanishes at 0, ½ and 1, so all three constants are
/// stationary states.
ReactionSpec three_root_reaction(Eigen::Index nodes, double c);

}  // namespace nlch
