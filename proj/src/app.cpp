#include "nlch/app.hpp"

#include "nlch/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace nlch {

Grid make_grid(const RunConfig& cfg) { return build_grid(cfg.dim, cfg.n, cfg.length); }

KernelOp make_kernel(const RunConfig& cfg, const Grid& g) {
  const KernelBlock& k = cfg.kernel;
  if (k.family == "zero") return KernelOp::zero(g);
  if (k.family == "gaussian") return assemble_kernel(GaussianKernel{k.c, k.lambda}, g);
  if (k.family == "mollifier") return assemble_kernel(MollifierKernel{k.c, k.h_cut}, g);
  return assemble_kernel(NewtonKernel{cfg.dim, k.newton_k}, g);
}

ReactionSpec make_reaction(const RunConfig& cfg, const Grid& g) {
  const ReactionBlock& r = cfg.reaction;
  const Eigen::Index n = g.size();
  if (r.preset == "logistic") return ReactionSpec::logistic(Field::Constant(n, r.alpha));
  if (r.preset == "bertozzi")
    return ReactionSpec::bertozzi(Field::Constant(n, r.beta), Field::Constant(n, r.h));
  if (r.preset == "oono") return ReactionSpec::oono(Field::Constant(n, r.sigma));
  if (r.preset == "three_root") return three_root_reaction(n, r.c);
  return ReactionSpec::none(n);
}

Field random_field(const Grid& g, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Field u(g.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = dist(rng);
  return u;
}

Field cosine_field(const Grid& g, double value, double amplitude, int mode) {
  Field u(g.size());
  const double k = mode * std::numbers::pi / g.length;
  for (Eigen::Index p = 0; p < u.size(); ++p) {
    const auto x = g.node(p);
    double prof = std::cos(k * x[0]);
    if (g.dim == 2) prof *= std::cos(k * x[1]);
    u(p) = value + amplitude * prof;
  }
  return u;
}

Field make_initial(const RunConfig& cfg, const Grid& g, std::uint64_t seed) {
  const InitialBlock& ini = cfg.initial;
  if (ini.type == "constant") return constant_field(g, ini.value);
  if (ini.type == "cosine") return cosine_field(g, ini.value, ini.amplitude, ini.mode);
  if (ini.type == "random") return random_field(g, seed, ini.lo, ini.hi);
  FieldDump d = read_field(ini.path);
  if (!(d.grid == g)) throw Error("initial field '" + ini.path + "' lives on a different grid");
  return d.values;
}

namespace {

namespace fs = std::filesystem;

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

class Report {
 public:
  explicit Report(const RunConfig& cfg) : cfg_(cfg) { os_ << std::setprecision(12); }

  template <typename T>
  void line(const std::string& key, const T& value) {
    os_ << key << ": " << value << '\n';
  }
  void text(const std::string& s) { os_ << s << '\n'; }
  void check(const std::string& name, bool passed, const std::string& detail = {}) {
    checks_.push_back({name, passed, detail});
  }
  bool all_passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.passed; });
  }

  void write(const fs::path& dir, std::ostream& log) const {
    std::ofstream f(dir / "report.txt", std::ios::trunc);
    if (!f) throw Error("cannot write report.txt in '" + dir.string() + "'");
    f << "command: " << command_name(cfg_.command) << '\n';
    f << "seed: " << cfg_.seed << '\n';
    f << os_.str();
    f << "\n[checks]\n";
    for (const auto& c : checks_) {
      f << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) f << " (" << c.detail << ")";
      f << '\n';
      if (!c.passed) log << "invariant failed: " << c.name << " " << c.detail << '\n';
    }
    f << "\n[resolved config]\n" << to_text(cfg_);
  }

 private:
  const RunConfig& cfg_;
  std::ostringstream os_;
  std::vector<Check> checks_;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void describe_setup(Report& rep, const RunConfig& cfg, const KernelOp& op,
                    const ReactionSpec& spec) {
  const Grid& g = op.grid();
  rep.line("grid", "dim=" + std::to_string(g.dim) + " n=" + std::to_string(g.n) +
                       " length=" + num(g.length) + " h=" + num(g.h));
  rep.line("kernel", cfg.kernel.family);
  if (cfg.kernel.family == "newton") rep.line("newton_k", cfg.kernel.newton_k);
  rep.line("reaction", spec.name());
  rep.line("reaction_lipschitz", spec.lipschitz());
  const KernelConstants kc = kernel_constants(op);
  rep.line("k2_sup", kc.k2_sup);
  rep.line("r2_est", kc.r2_est);
  rep.line("rinf_est", kc.rinf_est);
  rep.line("contraction_threshold", contraction_threshold(kc));
}

std::optional<Field> reference_field(const RunConfig& cfg, const Grid& g, const Field& u0) {
  if (cfg.reference == "zero") return constant_field(g, 0.0);
  if (cfg.reference == "one") return constant_field(g, 1.0);
  if (cfg.reference == "initial_mean") return constant_field(g, u0.mean());
  return std::nullopt;
}

void report_fit(Report& rep, const std::string& label, const std::vector<double>& t,
                const std::vector<double>& v) {
  try {
    const ExponentialFit fit = fit_trailing(t, v, 0.5, 1e-300);
    rep.line(label + "_rate", fit.rate);
    rep.line(label + "_r_squared", fit.r_squared);
  } catch (const Error& e) {
    rep.line(label + "_rate", std::string("unavailable: ") + e.what());
  }
}

void run_command(const RunConfig& cfg, const KernelOp& op, const ReactionSpec& spec,
                 const fs::path& dir, Report& rep) {
  const Grid& g = op.grid();
  const Field u0 = make_initial(cfg, g, cfg.seed);
  RunOptions opt;
  opt.reference = reference_field(cfg, g, u0);
  opt.on_record = [&](const State& s) {
    if (cfg.snapshot_every > 0 && s.step_count % cfg.snapshot_every == 0)
      write_field((dir / ("snap_" + std::to_string(s.step_count) + ".nlch")).string(), g, s.u, s.t);
  };
  write_field((dir / "initial.nlch").string(), g, u0, 0.0);
  const RunResult res = run(u0, spec, op, cfg.solver, opt);
  write_field((dir / "final.nlch").string(), g, res.state.u, res.state.t);
  write_series_csv((dir / "series.csv").string(), res.record);

  const TrajectoryRecord& rec = res.record;
  for (const auto& w : res.warnings) rep.line("warning", w);
  rep.line("steps", res.state.step_count);
  rep.line("final_time", res.state.t);
  rep.line("total_cg_iterations", res.total_cg_iterations);
  rep.line("clamp_events", res.state.clamp_events);
  rep.line("max_mass_residual", res.max_mass_residual);
  const auto [k1, k2] = separation(res.state.u);
  rep.line("final_k1", k1);
  rep.line("final_k2", k2);
  double h1_late = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k)
    if (rec.times[k] >= 1.0) h1_late = std::max(h1_late, rec.h1_seminorm[k]);
  rep.line("max_h1_seminorm_after_t1", h1_late);
  report_fit(rep, "l2_norm", rec.times, rec.l2_norm);
  if (opt.reference) report_fit(rep, "dist_to_ref", rec.times, rec.dist_to_ref);

  const double lo = *std::min_element(rec.min_u.begin(), rec.min_u.end());
  const double hi = *std::max_element(rec.max_u.begin(), rec.max_u.end());
  rep.check("phase bounds", lo >= -cfg.solver.bound_tol && hi <= 1.0 + cfg.solver.bound_tol &&
                                res.warned_steps == 0,
            "min " + num(lo) + ", max " + num(hi));
  rep.check("mass identity", res.max_mass_residual <= 1e-12, num(res.max_mass_residual));
  rep.check("finite series", rec.consistent() && res.state.u.allFinite());
  const double mscale = 1e-12 * std::max(std::abs(rec.mass.front()), 1e-300);
  if (spec.is_zero()) {
    rep.check("mass conserved", std::abs(rec.mass.back() - rec.mass.front()) <= mscale * 1e2 + 1e-15);
    double worst = 0.0;
    for (std::size_t k = 1; k < rec.size(); ++k)
      worst = std::max(worst, rec.energy[k] - rec.energy[k - 1]);
    rep.line("max_energy_increase", worst);
    rep.check("energy nonincreasing", worst <= 1e-10, num(worst));
  } else if (spec.nonnegative()) {
    rep.check("mass nondecreasing", res.min_mass_increment >= -mscale, num(res.min_mass_increment));
  } else if (spec.nonpositive()) {
    rep.check("mass nonincreasing", res.max_mass_increment <= mscale, num(res.max_mass_increment));
  }
  if (cfg.reaction.preset == "oono") {
    bool ok = true;
    for (std::size_t k = 0; k < rec.size(); ++k)
      ok = ok && rec.l2_norm[k] * rec.l2_norm[k] <= 3.0 * g.volume() * rec.mass[k] + 1e-14;
    rep.check("l2 bounded by mass", ok);
  }
}

void pair_command(const RunConfig& cfg, const KernelOp& op, const ReactionSpec& spec,
                  const fs::path& dir, Report& rep) {
  const Grid& g = op.grid();
  const Field u01 = make_initial(cfg, g, cfg.seed);
  const Field u02 = random_field(g, cfg.pair_seed, cfg.initial.lo, cfg.initial.hi);
  const PairResult res = pair_run(u01, u02, spec, op, cfg.solver);
  write_columns_csv((dir / "pair.csv").string(), {"t", "distance"}, {res.times, res.distance});
  write_field((dir / "final_first.nlch").string(), g, res.first.u, res.first.t);
  write_field((dir / "final_second.nlch").string(), g, res.second.u, res.second.t);
  for (const auto& w : res.warnings) rep.line("warning", w);
  rep.line("initial_distance", res.distance.front());
  rep.line("final_distance", res.distance.back());
  const GrowthReport gr = distance_growth(res.times, res.distance);
  rep.line("growth_c_sup", gr.c_sup);
  rep.line("growth_c_fit", gr.c_fit);
  rep.line("growth_fit_relative_residual", gr.relative_residual);
  report_fit(rep, "distance_decay", res.times, res.distance);
  rep.check("distance finite", gr.finite);
  for (const State* s : {&res.first, &res.second}) {
    const double lo = s->u.minCoeff(), hi = s->u.maxCoeff();
    rep.check("phase bounds", lo >= -cfg.solver.bound_tol && hi <= 1.0 + cfg.solver.bound_tol,
              "min " + num(lo) + ", max " + num(hi));
  }
}

std::vector<Field> equilibrium_seeds(const RunConfig& cfg, const Grid& g) {
  std::vector<Field> seeds;
  for (const auto& s : cfg.eq_seeds) {
    if (s == "initial") {
      seeds.push_back(make_initial(cfg, g, cfg.seed));
      continue;
    }
    const auto colon = s.find(':');
    const std::string kind = s.substr(0, colon), arg = s.substr(colon + 1);
    if (kind == "const")
      seeds.push_back(constant_field(g, std::stod(arg)));
    else
      seeds.push_back(random_field(g, std::stoull(arg), cfg.initial.lo, cfg.initial.hi));
  }
  return seeds;
}

void equilibrium_command(const RunConfig& cfg, const KernelOp& op, const ReactionSpec& spec,
                         const fs::path& dir, Report& rep) {
  const Grid& g = op.grid();
  const auto found = multistart_equilibria(equilibrium_seeds(cfg, g), spec, op, cfg.equilibrium);
  rep.line("equilibria", found.size());
  SolverConfig flow = cfg.solver;
  flow.t_end = 1.0;
  for (std::size_t k = 0; k < found.size(); ++k) {
    const EquilibriumResult& r = found[k];
    const std::string tag = "equilibrium_" + std::to_string(k);
    write_field((dir / (tag + ".nlch")).string(), g, r.u, 0.0);
    rep.line(tag + "_mean", r.u.mean());
    rep.line(tag + "_converged", r.converged ? "yes" : "no");
    rep.line(tag + "_iterations", r.iterations);
    rep.line(tag + "_residual", r.residual);
    rep.line(tag + "_max_excursion", r.max_excursion);
    if (r.compatibility_defect) rep.line(tag + "_compatibility", "defect: mean g(u) != 0");
    if (!r.converged) continue;
    const RunResult drift = run(r.u, spec, op, flow);
    const double d = l2_norm(g, drift.state.u - r.u);
    rep.line(tag + "_flow_drift", d);
    rep.check(tag + " residual", r.residual < 1e-8, num(r.residual));
    rep.check(tag + " bounds", r.max_excursion <= 1e-8, num(r.max_excursion));
    rep.check(tag + " stationary under flow", d <= 10.0 * flow.dt, num(d));
  }
}

void remainder_command(const RunConfig& cfg, const KernelOp& op, const ReactionSpec& spec,
                       const fs::path& dir, Report& rep) {
  const Grid& g = op.grid();
  const Field u0 = make_initial(cfg, g, cfg.seed);
  Field d = cosine_field(g, 0.0, 1.0, cfg.tangent.direction_mode);
  d /= l2_norm(g, d);
  const RemainderResult r = remainder_order(u0, d, cfg.tangent.eps_list, spec, op, cfg.solver,
                                            cfg.tangent.remainder_t);
  write_columns_csv((dir / "remainder.csv").string(), {"eps", "remainder"}, {r.eps, r.remainder});
  for (const auto& w : r.warnings) rep.line("warning", w);
  if (r.exact) {
    rep.line("order", "exact");
  } else {
    rep.line("order", *r.order);
    rep.line("order_r_squared", r.r_squared);
  }
  rep.check("remainder finite", std::all_of(r.remainder.begin(), r.remainder.end(),
                                            [](double v) { return std::isfinite(v); }));
}

void trace_command(const RunConfig& cfg, const KernelOp& op, const ReactionSpec& spec,
                   const fs::path& dir, Report& rep) {
  const Grid& g = op.grid();
  std::vector<Field> data{make_initial(cfg, g, cfg.seed)};
  for (int k = 1; k < cfg.tangent.samples; ++k)
    data.push_back(random_field(g, cfg.seed + std::uint64_t(k), cfg.initial.lo, cfg.initial.hi));
  TraceConfig tc;
  tc.ortho_every = cfg.tangent.ortho_every;
  tc.transient = cfg.tangent.transient;
  tc.neg_tol = cfg.tangent.neg_tol;
  const DimensionBound b =
      dimension_bound(data, cfg.tangent.n_max, cfg.tangent.t_final, spec, op, cfg.solver, tc);
  std::vector<double> ns, tr;
  for (std::size_t k = 0; k < b.curve.size(); ++k) {
    ns.push_back(double(k + 1));
    tr.push_back(b.curve[k]);
  }
  write_columns_csv((dir / "trace.csv").string(), {"n", "trace"}, {ns, tr});
  rep.line("samples", data.size());
  std::ostringstream curve;
  curve << std::setprecision(10);
  for (std::size_t k = 0; k < tr.size(); ++k) curve << (k ? " " : "") << tr[k];
  rep.line("trace_curve", curve.str());
  if (b.n) {
    rep.line("dimension_bound_N", *b.n);
    rep.line("negative_for_all_n_ge_N", b.negative_beyond ? "yes" : "no");
  } else {
    rep.line("dimension_bound_N", "none <= " + std::to_string(cfg.tangent.n_max));
  }
  rep.check("trace finite",
            std::all_of(tr.begin(), tr.end(), [](double v) { return std::isfinite(v); }));
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    log << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  {
    std::ofstream echo(dir / "config.resolved", std::ios::trunc);
    echo << to_text(cfg);
  }
  Report rep(cfg);
  int code = kExitOk;
  try {
    const Grid g = make_grid(cfg);
    const KernelOp op = make_kernel(cfg, g);
    const ReactionSpec spec = make_reaction(cfg, g);
    describe_setup(rep, cfg, op, spec);
    switch (cfg.command) {
      case Command::run: run_command(cfg, op, spec, dir, rep); break;
      case Command::pair: pair_command(cfg, op, spec, dir, rep); break;
      case Command::equilibrium: equilibrium_command(cfg, op, spec, dir, rep); break;
      case Command::remainder: remainder_command(cfg, op, spec, dir, rep); break;
      case Command::trace: trace_command(cfg, op, spec, dir, rep); break;
    }
    if (!rep.all_passed()) code = kExitInvariant;
  } catch (const SolverError& e) {
    rep.line("aborted", e.what());
    rep.check("completed without abort", false, e.what());
    log << "aborted: " << e.what() << '\n';
    code = kExitAbort;
  } catch (const Error& e) {
    rep.line("error", e.what());
    rep.check("completed", false, e.what());
    log << "error: " << e.what() << '\n';
    code = kExitConfig;
  }
  rep.write(dir, log);
  log << command_name(cfg.command) << " finished, output in " << dir.string() << '\n';
  return code;
}

}  // namespace nlch
