#include "nlch/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string_view>

namespace nlch {

Command parse_command(const std::string& name) {
  if (name == "run") return Command::run;
  if (name == "pair") return Command::pair;
  if (name == "equilibrium") return Command::equilibrium;
  if (name == "remainder") return Command::remainder;
  if (name == "trace") return Command::trace;
  throw Error("unknown command '" + name + "' (run, pair, equilibrium, remainder, trace)");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::run: return "run";
    case Command::pair: return "pair";
    case Command::equilibrium: return "equilibrium";
    case Command::remainder: return "remainder";
    case Command::trace: return "trace";
  }
  return "run";
}

double reaction_lipschitz(const ReactionBlock& r) {
  if (r.preset == "logistic") return r.alpha;
  if (r.preset == "bertozzi") return r.beta;
  if (r.preset == "oono") return r.sigma;
  if (r.preset == "three_root") return r.c;
  return 0.0;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error("expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error("expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error("expected an unsigned integer, got '" + s + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw Error("empty entry in list '" + s + "'");
    out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += fmt(items[k]);
    else
      out += items[k];
  }
  return out;
}

std::string one_of(const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = "'" + v + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw Error(msg);
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NLCH_NUM(key, field)                                                   \
  Key{key, [](RunConfig& c, const std::string& v) { c.field = to_double(v); }, \
      [](const RunConfig& c) { return fmt(c.field); }}
#define NLCH_INT(key, field)                                                       \
  Key{key, [](RunConfig& c, const std::string& v) { c.field = int(to_int(v)); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      NLCH_INT("grid.dim", dim),
      NLCH_INT("grid.n", n),
      NLCH_NUM("grid.length", length),

      Key{"kernel.family",
          [](RunConfig& c, const std::string& v) {
            c.kernel.family = one_of(v, {"gaussian", "mollifier", "newton", "zero"});
          },
          [](const RunConfig& c) { return c.kernel.family; }},
      NLCH_NUM("kernel.c", kernel.c),
      NLCH_NUM("kernel.lambda", kernel.lambda),
      NLCH_NUM("kernel.h_cut", kernel.h_cut),
      NLCH_NUM("kernel.newton_k", kernel.newton_k),

      Key{"reaction.preset",
          [](RunConfig& c, const std::string& v) {
            c.reaction.preset = one_of(v, {"none", "logistic", "bertozzi", "oono", "three_root"});
          },
          [](const RunConfig& c) { return c.reaction.preset; }},
      NLCH_NUM("reaction.alpha", reaction.alpha),
      NLCH_NUM("reaction.beta", reaction.beta),
      NLCH_NUM("reaction.h", reaction.h),
      NLCH_NUM("reaction.sigma", reaction.sigma),
      NLCH_NUM("reaction.c", reaction.c),

      NLCH_NUM("solver.dt", solver.dt),
      NLCH_NUM("solver.t_end", solver.t_end),
      NLCH_INT("solver.record_every", solver.record_every),
      NLCH_NUM("solver.bound_tol", solver.bound_tol),
      Key{"solver.clamp_policy",
          [](RunConfig& c, const std::string& v) {
            c.solver.clamp_policy = one_of(v, {"off", "clamp_and_count"}) == "off"
                                        ? ClampPolicy::off
                                        : ClampPolicy::clamp_and_count;
          },
          [](const RunConfig& c) {
            return std::string(c.solver.clamp_policy == ClampPolicy::off ? "off"
                                                                         : "clamp_and_count");
          }},
      NLCH_NUM("solver.cg_tol", solver.cg_tol),
      NLCH_INT("solver.cg_max_iter", solver.cg_max_iter),

      Key{"initial.type",
          [](RunConfig& c, const std::string& v) {
            c.initial.type = one_of(v, {"constant", "cosine", "random", "file"});
          },
          [](const RunConfig& c) { return c.initial.type; }},
      NLCH_NUM("initial.value", initial.value),
      NLCH_NUM("initial.amplitude", initial.amplitude),
      NLCH_INT("initial.mode", initial.mode),
      NLCH_NUM("initial.lo", initial.lo),
      NLCH_NUM("initial.hi", initial.hi),
      Key{"initial.seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      Key{"initial.path", [](RunConfig& c, const std::string& v) { c.initial.path = v; },
          [](const RunConfig& c) { return c.initial.path; }},

      Key{"pair.seed", [](RunConfig& c, const std::string& v) { c.pair_seed = to_u64(v); },
          [](const RunConfig& c) { return std::to_string(c.pair_seed); }},

      Key{"output.directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
          [](const RunConfig& c) { return c.out_dir; }},
      NLCH_INT("output.snapshot_every", snapshot_every),

      Key{"equilibrium.eps_schedule",
          [](RunConfig& c, const std::string& v) { c.equilibrium.eps_schedule = to_doubles(v); },
          [](const RunConfig& c) { return join(c.equilibrium.eps_schedule); }},
      NLCH_NUM("equilibrium.damping", equilibrium.damping),
      NLCH_NUM("equilibrium.picard_tol", equilibrium.picard_tol),
      NLCH_INT("equilibrium.max_iter", equilibrium.max_iter),
      NLCH_NUM("equilibrium.dedup_tol", equilibrium.dedup_tol),
      Key{"equilibrium.anchor",
          [](RunConfig& c, const std::string& v) {
            c.equilibrium.anchor = one_of(v, {"previous_iterate", "origin"}) == "origin"
                                       ? EpsilonAnchor::origin
                                       : EpsilonAnchor::previous_iterate;
          },
          [](const RunConfig& c) {
            return std::string(c.equilibrium.anchor == EpsilonAnchor::origin ? "origin"
                                                                             : "previous_iterate");
          }},
      Key{"equilibrium.seeds",
          [](RunConfig& c, const std::string& v) { c.eq_seeds = split_list(v); },
          [](const RunConfig& c) { return join(c.eq_seeds); }},

      NLCH_INT("tangent.n_max", tangent.n_max),
      NLCH_NUM("tangent.t_final", tangent.t_final),
      NLCH_INT("tangent.ortho_every", tangent.ortho_every),
      NLCH_NUM("tangent.transient", tangent.transient),
      NLCH_NUM("tangent.neg_tol", tangent.neg_tol),
      NLCH_INT("tangent.samples", tangent.samples),
      Key{"tangent.eps_list",
          [](RunConfig& c, const std::string& v) { c.tangent.eps_list = to_doubles(v); },
          [](const RunConfig& c) { return join(c.tangent.eps_list); }},
      NLCH_NUM("tangent.remainder_t", tangent.remainder_t),
      NLCH_INT("tangent.direction_mode", tangent.direction_mode),

      Key{"diagnostics.reference",
          [](RunConfig& c, const std::string& v) {
            c.reference = one_of(v, {"none", "zero", "one", "initial_mean"});
          },
          [](const RunConfig& c) { return c.reference; }},
  };
  return table;
}

#undef NLCH_NUM
#undef NLCH_INT

void check_seed_spec(const std::string& s) {
  if (s == "initial") return;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw Error("equilibrium seed '" + s + "' must be initial, const:<v> or random:<seed>");
  const std::string kind = s.substr(0, colon), arg = s.substr(colon + 1);
  if (kind == "const") {
    const double v = to_double(arg);
    if (!(v >= 0.0 && v <= 1.0)) throw Error("constant seed must lie in [0,1]");
  } else if (kind == "random") {
    to_u64(arg);
  } else {
    throw Error("equilibrium seed '" + s + "' must be initial, const:<v> or random:<seed>");
  }
}

}  // namespace

void validate(const RunConfig& c) {
  build_grid(c.dim, c.n, c.length);
  const auto& k = c.kernel;
  if (k.family == "gaussian" && !(k.c >= 0.0 && k.lambda > 0.0))
    throw Error("gaussian kernel needs c >= 0 and lambda > 0");
  if (k.family == "mollifier" && !(k.c >= 0.0 && k.h_cut > 0.0))
    throw Error("mollifier kernel needs c >= 0 and h_cut > 0");
  if (k.family == "newton") {
    if (c.dim < 2) throw Error("newton potential is only defined for dim >= 2");
    if (!(k.newton_k > 0.0)) throw Error("kernel.newton_k must be positive");
  }
  const auto& r = c.reaction;
  if (r.preset == "logistic" && !(r.alpha >= 0.0)) throw Error("reaction.alpha must be >= 0");
  if (r.preset == "bertozzi" && !(r.beta >= 0.0 && r.h >= 0.0 && r.h <= 1.0))
    throw Error("bertozzi needs beta >= 0 and 0 <= h <= 1");
  if (r.preset == "oono" && !(r.sigma >= 0.0)) throw Error("reaction.sigma must be >= 0");
  if (r.preset == "three_root" && !(r.c >= 0.0)) throw Error("reaction.c must be >= 0");

  c.solver.validate(reaction_lipschitz(r));

  const auto& ini = c.initial;
  if (ini.type == "constant" && !(ini.value >= 0.0 && ini.value <= 1.0))
    throw Error("initial.value must lie in [0,1]");
  if (ini.type == "cosine" && !(ini.value - std::abs(ini.amplitude) >= 0.0 &&
                                ini.value + std::abs(ini.amplitude) <= 1.0))
    throw Error("cosine initial data must stay inside [0,1]");
  if (ini.type == "cosine" && ini.mode < 0) throw Error("initial.mode must be >= 0");
  if (ini.type == "random" && !(0.0 <= ini.lo && ini.lo <= ini.hi && ini.hi <= 1.0))
    throw Error("random initial data needs 0 <= lo <= hi <= 1");
  if (ini.type == "file") {
    if (ini.path.empty()) throw Error("initial.path is required for file initial data");
    if (!std::filesystem::exists(ini.path)) throw Error("initial.path '" + ini.path + "' does not exist");
  }
  if (c.snapshot_every < 0) throw Error("output.snapshot_every must be >= 0");
  if (c.out_dir.empty()) throw Error("output.directory must not be empty");

  c.equilibrium.validate();
  for (const auto& s : c.eq_seeds) check_seed_spec(s);

  const auto& t = c.tangent;
  if (t.n_max < 0) throw Error("tangent.n_max must be >= 0");
  if (t.n_max > build_grid(c.dim, c.n, c.length).size())
    throw Error("tangent.n_max exceeds the node count");
  if (!(t.t_final >= 1.0)) throw Error("tangent.t_final must be at least 1");
  if (t.ortho_every < 1) throw Error("tangent.ortho_every must be >= 1");
  if (!(t.transient >= 0.0 && t.transient <= t.t_final))
    throw Error("tangent.transient must lie in [0, t_final]");
  if (!(t.neg_tol >= 0.0)) throw Error("tangent.neg_tol must be >= 0");
  if (t.samples < 1) throw Error("tangent.samples must be >= 1");
  if (!(t.remainder_t > 0.0)) throw Error("tangent.remainder_t must be positive");
  if (t.direction_mode < 0) throw Error("tangent.direction_mode must be >= 0");
  for (std::size_t k = 0; k < t.eps_list.size(); ++k) {
    if (!(t.eps_list[k] > 0.0)) throw Error("tangent.eps_list entries must be positive");
    if (k && !(t.eps_list[k] < t.eps_list[k - 1]))
      throw Error("tangent.eps_list must be strictly decreasing");
  }
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(where + "expected 'section.key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.find('.') == std::string::npos)
      throw Error(where + "key '" + key + "' must have the form section.key");
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Key& k) { return key == k.name; });
    if (it == table.end()) throw Error(where + "unknown key '" + key + "'");
    if (value.empty()) throw Error(where + "missing value for '" + key + "'");
    try {
      it->set(cfg, value);
    } catch (const Error& e) {
      throw Error(where + key + ": " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const Key& k : keys()) {
    const std::string v = k.get(cfg);
    if (v.empty()) continue;
    out += std::string(k.name) + " = " + v + "\n";
  }
  return out;
}

}  // namespace nlch
