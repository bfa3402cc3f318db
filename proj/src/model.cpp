#include "nlch/model.hpp"

#include "nlch/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace nlch {

double f_prime(double s, double guard) {
  const double sc = std::clamp(s, guard, 1.0 - guard);
  return std::log(sc / (1.0 - sc));
}

double entropy(double s) {
  const double sc = std::clamp(s, 0.0, 1.0);
  double out = 0.0;
  if (sc > 0.0) out += sc * std::log(sc);
  if (sc < 1.0) out += (1.0 - sc) * std::log(1.0 - sc);
  return out;
}

ChemicalPotential chemical_potential(const Field& u, const KernelOp& op, double guard) {
  require_on_grid(op.grid(), u.size(), "chemical_potential");
  ChemicalPotential out;
  out.v = op.convolve(Field::Ones(u.size()) - 2.0 * u);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) < guard || u(i) > 1.0 - guard) ++out.guarded_nodes;
    out.v(i) += f_prime(u(i), guard);
  }
  return out;
}

namespace {

double clamp01(double s) { return std::clamp(s, 0.0, 1.0); }

void require_size(const Field& f, Eigen::Index nodes, const char* what) {
  if (f.size() != nodes) throw Error(std::string(what) + " has wrong node count");
  if (!f.allFinite()) throw Error(std::string(what) + " must be finite");
}

}  // namespace

ReactionSpec::ReactionSpec(std::variant<Logistic, Bertozzi, Oono, Custom> v, Eigen::Index nodes,
                           double lipschitz, std::string name)
    : variant_(std::move(v)), nodes_(nodes), lipschitz_(lipschitz), name_(std::move(name)) {
  validate();
}

ReactionSpec ReactionSpec::logistic(Field alpha) {
  if ((alpha.array() < 0.0).any()) throw Error("logistic reaction needs alpha >= 0");
  const Eigen::Index n = alpha.size();
  const double lip = alpha.size() ? alpha.maxCoeff() : 0.0;
  ReactionSpec r(Logistic{std::move(alpha)}, n, lip, "logistic");
  r.sign_ = 1;
  return r;
}

ReactionSpec ReactionSpec::bertozzi(Field beta, Field target) {
  if ((beta.array() < 0.0).any()) throw Error("bertozzi reaction needs beta >= 0");
  if ((target.array() < 0.0).any() || (target.array() > 1.0).any())
    throw Error("bertozzi reaction needs 0 <= h <= 1");
  if (beta.size() != target.size()) throw Error("bertozzi beta and h differ in size");
  const Eigen::Index n = beta.size();
  const double lip = beta.size() ? beta.maxCoeff() : 0.0;
  return ReactionSpec(Bertozzi{std::move(beta), std::move(target)}, n, lip, "bertozzi");
}

ReactionSpec ReactionSpec::oono(Field sigma) {
  if ((sigma.array() < 0.0).any()) throw Error("oono reaction needs sigma >= 0");
  const Eigen::Index n = sigma.size();
  const double lip = sigma.size() ? sigma.maxCoeff() : 0.0;
  ReactionSpec r(Oono{std::move(sigma)}, n, lip, "oono");
  r.sign_ = -1;
  return r;
}

ReactionSpec ReactionSpec::custom(Eigen::Index nodes, NodeFn g, NodeFn dg, double lipschitz_s,
                                  std::string name) {
  if (!g || !dg) throw Error("custom reaction requires both g and its s-derivative");
  if (!(lipschitz_s >= 0.0)) throw Error("custom reaction needs a nonnegative Lipschitz bound");
  ReactionSpec r(Custom{std::move(g), std::move(dg)}, nodes, lipschitz_s, std::move(name));
  // sign classification by sampling s ∈ [0,1]
  bool nonneg = true, nonpos = true;
  for (Eigen::Index i = 0; i < nodes; ++i)
    for (int k = 0; k <= 64; ++k) {
      const double gv = r.value(i, k / 64.0);
      nonneg = nonneg && gv >= 0.0;
      nonpos = nonpos && gv <= 0.0;
    }
  r.sign_ = nonneg && !nonpos ? 1 : (nonpos && !nonneg ? -1 : 0);
  return r;
}

ReactionSpec ReactionSpec::none(Eigen::Index nodes) {
  ReactionSpec r = oono(Field::Zero(nodes));
  r.name_ = "none";
  return r;
}

double ReactionSpec::value(Eigen::Index i, double s) const {
  const double sc = clamp01(s);
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Logistic>) return v.alpha(i) * sc * (1.0 - sc);
        else if constexpr (std::is_same_v<T, Bertozzi>) return v.beta(i) * (v.target(i) - sc);
        else if constexpr (std::is_same_v<T, Oono>) return -v.sigma(i) * sc;
        else return v.g(i, sc);
      },
      variant_);
}

double ReactionSpec::derivative(Eigen::Index i, double s) const {
  // derivative of the constant extension vanishes outside [0,1]
  if (s < 0.0 || s > 1.0) return 0.0;
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Logistic>) return v.alpha(i) * (1.0 - 2.0 * s);
        else if constexpr (std::is_same_v<T, Bertozzi>) return -v.beta(i);
        else if constexpr (std::is_same_v<T, Oono>) return -v.sigma(i);
        else return v.dg(i, s);
      },
      variant_);
}

void ReactionSpec::validate() {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Logistic>) require_size(v.alpha, nodes_, "alpha");
        else if constexpr (std::is_same_v<T, Bertozzi>) {
          require_size(v.beta, nodes_, "beta");
          require_size(v.target, nodes_, "h");
        } else if constexpr (std::is_same_v<T, Oono>) require_size(v.sigma, nodes_, "sigma");
      },
      variant_);
  for (Eigen::Index i = 0; i < nodes_; ++i) {
    const double g0 = value(i, 0.0), g1 = value(i, 1.0);
    if (!std::isfinite(g0) || !std::isfinite(g1))
      throw Error("reaction term is not finite at node " + std::to_string(i));
    if (g0 < 0.0 || g1 > 0.0)
      throw Error("reaction violates g(x,0) >= 0 >= g(x,1) at node " + std::to_string(i));
  }
  if (const auto* c = std::get_if<Custom>(&variant_)) {
    // Only the Lipschitz bound of g in s is checkable from samples.
    for (Eigen::Index i = 0; i < nodes_; ++i)
      for (int k = 0; k <= 32; ++k) {
        const double d = c->dg(i, k / 32.0);
        if (!std::isfinite(d)) throw Error("custom reaction derivative is not finite");
        if (std::abs(d) > lipschitz_ * (1.0 + 1e-12) + 1e-12)
          throw Error("custom reaction derivative exceeds the declared Lipschitz bound");
      }
  }
  bool all_zero = true;
  for (Eigen::Index i = 0; i < nodes_ && all_zero; ++i)
    for (int k = 0; k <= 8; ++k)
      if (value(i, k / 8.0) != 0.0 || derivative(i, k / 8.0) != 0.0) {
        all_zero = false;
        break;
      }
  zero_ = all_zero;
}

Field reaction_eval(const ReactionSpec& spec, const Field& u) {
  if (u.size() != spec.size()) throw Error("reaction_eval: field does not match reaction grid");
  Field out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = spec.value(i, u(i));
  return out;
}

Field reaction_deriv(const ReactionSpec& spec, const Field& u) {
  if (u.size() != spec.size()) throw Error("reaction_deriv: field does not match reaction grid");
  Field out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = spec.derivative(i, u(i));
  return out;
}

ReactionSpec three_root_reaction(Eigen::Index nodes, double c) {
  if (!(c >= 0.0)) throw Error("three-root reaction amplitude must be nonnegative");
  return ReactionSpec::custom(
      nodes, [c](Eigen::Index, double s) { return c * s * (1.0 - s) * (1.0 - 2.0 * s); },
      [c](Eigen::Index, double s) { return c * (1.0 - 6.0 * s + 6.0 * s * s); }, c,
      "three_root");
}

}  // namespace nlch
