#include "cli.hpp"

#include "kktstab/conditions.hpp"
#include "kktstab/sweep.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace kktstab::cli {

namespace {

using nlohmann::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string builtin;
  std::string problem;
  std::uint64_t seed = 0;
  int starts = 200;
  std::string observable;
  std::string grid;
  std::string direction = "default";
  std::string out;
  std::string report;
  double drop_decades = 1.0;
  bool no_oracle = false;
};

struct Loaded {
  ConicProgram prog;
  std::optional<ReferencePoint> reference;
  std::optional<Fixture> fixture;
};

Loaded load(const Options& o) {
  Loaded l;
  if (!o.builtin.empty()) {
    try {
      Fixture fx = builtin_fixture(o.builtin);
      l.prog = fx.program;
      l.reference = fx.reference;
      l.fixture = std::move(fx);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
    return l;
  }
  try {
    ProblemFile pf = load_problem_file(o.problem);
    l.prog = std::move(pf.program);
    l.reference = std::move(pf.reference);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  return l;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v(i));
  }
  return s + "]";
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

json to_json(const ConditionResult& r) {
  return {{"verdict", to_string(r.verdict)},
          {"margin", number(r.margin)},
          {"witness", r.witness ? to_json(*r.witness) : json(nullptr)},
          {"note", r.note}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "' for writing");
  f << text;
}

const char* mark(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "✓";
    case Verdict::Fails: return "✗";
    case Verdict::Inconclusive: return "?";
  }
  return "?";
}

std::string upper(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "HOLDS";
    case Verdict::Fails: return "FAILS";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

// Solves the unperturbed problem from the origin with seeded restarts.
SolveResult solve_default(const ConicProgram& prog, std::uint64_t seed) {
  const KKTPoint origin{Vec::Zero(prog.n), Vec::Zero(prog.cone.dim())};
  return solve_kkt_multistart(prog, prog.zero_perturbation(), origin, 1.0, 32, {}, seed);
}

// The reference KKT point: stored with the problem, or computed.
KKTPoint reference_point(const Loaded& l, const Options& o, std::ostream& err, bool& failed) {
  failed = false;
  if (l.reference) {
    const double res = natural_residual(l.prog, l.reference->x, l.reference->y, l.prog.zero_perturbation());
    if (!(res <= 1e-8)) {
      throw InputError("supplied reference point is not a KKT point (natural residual " + fmt(res) + ")");
    }
    return {l.reference->x, l.reference->y, res};
  }
  const SolveResult sr = solve_default(l.prog, o.seed);
  if (!sr.converged) {
    err << "error: could not compute a KKT point: " << sr.message << "\n";
    failed = true;
  }
  return sr.point;
}

std::vector<std::string> headline(const ConditionReport& r) {
  std::vector<std::string> lines;
  lines.push_back("ROBUST ISOLATED CALMNESS: " + upper(r.srcq_and_sosc) + " (SRCQ " + mark(r.srcq.verdict) + ", SOSC " +
                  mark(r.sosc.verdict) + "); affine-hull probe: " + upper(r.affine_hull_probe.verdict));

  std::vector<std::string> holds, fails;
  for (auto [name, v] : {std::pair<const char*, Verdict>{"SRCQ", r.srcq.verdict}, {"SOSC", r.sosc.verdict}}) {
    if (v == Verdict::Holds) holds.push_back(name);
    if (v == Verdict::Fails) fails.push_back(name);
  }
  auto join = [](const std::vector<std::string>& v) {
    if (v.empty()) return std::string("none");
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  std::string verdict = r.srcq_and_sosc == Verdict::Holds   ? "isolated calm"
                        : r.srcq_and_sosc == Verdict::Fails ? "NOT isolated calm"
                                                        : "undetermined";
  std::string kernel = r.kernel_probe.verdict == Verdict::Fails   ? "kernel witness emitted"
                       : r.kernel_probe.verdict == Verdict::Holds ? "no kernel element found"
                                                                  : "kernel probe inconclusive";
  lines.push_back("HOLDS: " + join(holds) + "; FAILS: " + join(fails) + "; verdict: " + verdict + "; " + kernel);

  std::string mult = !r.multipliers              ? "multipliers not recovered"
                     : r.multipliers->is_singleton ? "multipliers unique"
                                                   : "multipliers non-unique (affine dim ≥ 1)";
  lines.push_back(std::string("RCQ ") + mark(r.rcq.verdict) + "; " + mult + "; SRCQ " + mark(r.srcq.verdict));
  return lines;
}

json report_json(const ConditionReport& r, const std::vector<std::string>& head) {
  json j;
  j["problem"] = r.problem;
  j["headline"] = head;
  j["x"] = to_json(r.x);
  j["y"] = to_json(r.y);
  if (r.multipliers) {
    json dirs = json::array();
    for (Eigen::Index k = 0; k < r.multipliers->directions.cols(); ++k) {
      dirs.push_back(to_json(r.multipliers->directions.col(k)));
    }
    j["multipliers"] = {{"representative", to_json(r.multipliers->representative)},
                        {"affine_dim", r.multipliers->affine_dim},
                        {"is_singleton", r.multipliers->is_singleton},
                        {"directions", dirs}};
  } else {
    j["multipliers"] = nullptr;
  }
  j["critical_cone_dim"] = r.critical_cone_dim;
  j["critical_cone_is_subspace"] = r.critical_cone_is_subspace;
  j["rcq"] = to_json(r.rcq);
  j["srcq"] = to_json(r.srcq);
  j["nondegeneracy"] = to_json(r.nondegeneracy);
  j["sosc"] = to_json(r.sosc);
  j["robinson_sosc"] = to_json(r.robinson_sosc);
  j["affine_hull_probe"] = to_json(r.affine_hull_probe);
  j["kernel_probe"] = {{"verdict", to_string(r.kernel_probe.verdict)},
                       {"min_residual", number(r.kernel_probe.min_residual)},
                       {"witness", r.kernel_probe.witness ? to_json(*r.kernel_probe.witness) : json(nullptr)},
                       {"starts", r.kernel_probe.starts}};
  j["srcq_and_sosc"] = to_string(r.srcq_and_sosc);
  j["consistent"] = r.consistent;
  j["inconsistencies"] = r.inconsistencies;
  j["notes"] = r.notes;
  return j;
}

bool essential_inconclusive(const ConditionReport& r) {
  return r.rcq.verdict == Verdict::Inconclusive || r.srcq.verdict == Verdict::Inconclusive ||
         r.sosc.verdict == Verdict::Inconclusive || r.kernel_probe.verdict == Verdict::Inconclusive ||
         r.srcq_and_sosc == Verdict::Inconclusive;
}

// Runs the checker battery at the reference point; returns nullopt after
// printing the error when no KKT point is available.
std::optional<ConditionReport> analyze(const Loaded& l, const Options& o, std::ostream& err, int& code) {
  bool failed = false;
  const KKTPoint pt = reference_point(l, o, err, failed);
  if (failed) {
    code = kSolverFailure;
    return std::nullopt;
  }
  ReportOptions ro;
  ro.check.seed = o.seed;
  ro.check.starts = o.starts;
  if (l.fixture) ro.multiplier_samples = l.fixture->multiplier_samples;
  try {
    return assemble_report(l.prog, pt.x, pt.y, ro);
  } catch (const NonAffineProgram& e) {
    throw InputError(e.what());
  }
}

void print_report(std::ostream& out, const ConditionReport& r, const std::vector<std::string>& head) {
  for (const auto& h : head) out << h << "\n";
  out << "\nproblem: " << r.problem << "\n";
  out << "x: " << fmt(r.x) << "\n";
  out << "y: " << fmt(r.y) << "\n";
  if (r.multipliers) out << "multiplier affine dimension: " << r.multipliers->affine_dim << "\n";
  out << "critical cone: " << (r.critical_cone_dim == 0 ? "{0}" : "dimension " + std::to_string(r.critical_cone_dim))
      << (r.critical_cone_dim > 0 && r.critical_cone_is_subspace ? " (subspace)" : "") << "\n\n";
  auto line = [&](const char* name, const ConditionResult& c) {
    out << "  " << name << ": " << to_string(c.verdict) << "  margin " << fmt(c.margin);
    if (c.witness) out << "  witness " << fmt(*c.witness);
    out << "\n      " << c.note << "\n";
  };
  line("RCQ", r.rcq);
  line("constraint nondegeneracy", r.nondegeneracy);
  line("SRCQ", r.srcq);
  line("SOSC", r.sosc);
  line("Robinson's SOSC", r.robinson_sosc);
  line("affine-hull probe", r.affine_hull_probe);
  out << "  kernel probe: " << to_string(r.kernel_probe.verdict) << "  min residual "
      << fmt(r.kernel_probe.min_residual) << " over " << r.kernel_probe.starts << " starts";
  if (r.kernel_probe.witness && r.kernel_probe.verdict == Verdict::Fails) {
    out << "  witness " << fmt(*r.kernel_probe.witness);
  }
  out << "\n  theory and kernel probe consistent: " << (r.consistent ? "yes" : "no") << "\n";
  for (const auto& s : r.inconsistencies) out << "  inconsistency: " << s << "\n";
  for (const auto& s : r.notes) out << "  note: " << s << "\n";
}

int cmd_list(std::ostream& out) {
  for (const auto& name : builtin_names()) out << name << "  " << builtin_fixture(name).description << "\n";
  return kOk;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load(o);
  const SolveResult sr = solve_default(l.prog, o.seed);
  out << "problem: " << l.prog.name << "\n";
  out << "status: " << sr.message << " (" << sr.iterations << " iterations)\n";
  out << "residual: " << fmt(sr.point.residual) << "\n";
  out << "x: " << fmt(sr.point.x) << "\n";
  out << "y: " << fmt(sr.point.y) << "\n";
  if (!o.out.empty()) {
    json j = {{"problem", l.prog.name},  {"converged", sr.converged}, {"iterations", sr.iterations},
              {"message", sr.message},   {"residual", number(sr.point.residual)},
              {"x", to_json(sr.point.x)}, {"y", to_json(sr.point.y)}};
    write_file(o.out, j.dump(2) + "\n");
  }
  if (!sr.converged) {
    err << "error: solver did not converge: " << sr.message << "\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load(o);
  int code = kOk;
  const auto rep = analyze(l, o, err, code);
  if (!rep) return code;
  const auto head = headline(*rep);
  print_report(out, *rep, head);
  if (!o.report.empty()) write_file(o.report, report_json(*rep, head).dump(2) + "\n");
  return essential_inconclusive(*rep) ? kInconclusive : kOk;
}

struct SweepRun {
  SweepResult result;
  double kappa = 0.0;
};

std::optional<SweepRun> sweep(const Loaded& l, const Options& o, std::ostream& err, int& code) {
  bool failed = false;
  const KKTPoint ref = reference_point(l, o, err, failed);
  if (failed) {
    code = kSolverFailure;
    return std::nullopt;
  }
  Perturbation dir;
  if (o.direction == "random" || (o.direction == "default" && !l.fixture)) {
    dir = random_unit_direction(l.prog, o.seed);
  } else if (o.direction == "fixture" || o.direction == "default") {
    if (!l.fixture) throw InputError("--direction fixture needs a builtin problem");
    dir = l.fixture->direction;
  } else {
    throw InputError("unknown --direction '" + o.direction + "' (expected fixture or random)");
  }
  SweepOptions so;
  so.observable = !o.observable.empty() ? o.observable : l.fixture ? l.fixture->observable : "full";
  so.use_oracle = !o.no_oracle;
  so.drop_decades = o.drop_decades;
  std::vector<double> grid;
  try {
    grid = o.grid.empty() ? default_grid() : parse_grid(o.grid);
    SweepRun run{run_sweep(l.prog, dir, grid, ref, so), 0.0};
    run.kappa = kappa_hat(run.result);
    return run;
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

std::string fit_summary(const SweepResult& r) {
  if (!r.fit) return "fitted exponent: unavailable (fewer than 4 usable records in the fit window)";
  return "fitted exponent " + fmt(r.fit->slope) + " ± " + fmt(r.fit->stderr_) + " over window [" +
         fmt(r.fit->eps_lo) + ", " + fmt(r.fit->eps_hi) + "]";
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load(o);
  int code = kOk;
  const auto run = sweep(l, o, err, code);
  if (!run) return code;
  const SweepResult& r = run->result;
  if (o.out.empty()) {
    write_csv(out, r);
  } else {
    std::ostringstream csv;
    write_csv(csv, r);
    write_file(o.out, csv.str());
  }
  out << "problem: " << l.prog.name << "  observable: " << r.observable << "  method: " << r.method << "\n";
  out << "solved: " << r.solved_count() << "/" << r.records.size() << "\n";
  out << fit_summary(r) << "\n";
  out << "kappa_hat: " << fmt(run->kappa) << "\n";
  if (r.solved_count() < 4) {
    err << "error: fewer than 4 perturbed problems were solved\n";
    return kSolverFailure;
  }
  return kOk;
}

int cmd_certify(const Options& o, std::ostream& out, std::ostream& err) {
  const Loaded l = load(o);
  int code = kOk;
  const auto rep = analyze(l, o, err, code);
  if (!rep) return code;
  Options so = o;
  if (so.observable.empty()) so.observable = "full";
  const auto run = sweep(l, so, err, code);
  if (!run) return code;
  const SweepResult& r = run->result;

  out << "theory: " << headline(*rep).front() << "\n";
  out << "measurement (" << r.observable << "): " << fit_summary(r) << "\n";
  if (r.solved_count() < 4 || !r.fit) {
    err << "error: sweep produced too few solved records for a fit\n";
    return kSolverFailure;
  }
  if (rep->srcq_and_sosc == Verdict::Inconclusive) {
    out << "certify: INCONCLUSIVE\n";
    return kInconclusive;
  }
  const bool calm = r.fit->slope >= 0.95;
  const bool agree = calm == (rep->srcq_and_sosc == Verdict::Holds);
  out << "measured: " << (calm ? "slope ≥ 0.95 (Lipschitz-type drift)" : "slope < 0.95 (slower than linear)")
      << "\ncertify: " << (agree ? "AGREE" : "CONFLICT") << "\n";
  return agree ? kOk : kConflict;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability diagnostics for conic programs at KKT points"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_source = [&](CLI::App* sub) {
    auto* b = sub->add_option("--builtin", o.builtin, "Built-in problem name");
    auto* p = sub->add_option("--problem", o.problem, "Problem file (JSON)");
    b->excludes(p);
    p->excludes(b);
    sub->add_option("--seed", o.seed, "Seed for every randomized search");
  };
  auto add_checks = [&](CLI::App* sub) {
    sub->add_option("--starts", o.starts, "Multistart count for searches")->check(CLI::PositiveNumber);
    sub->add_option("--report", o.report, "Write the JSON report here");
  };
  auto add_sweep = [&](CLI::App* sub) {
    sub->add_option("--observable", o.observable, "x, x2, multiplier-drift or full")
        ->check(CLI::IsMember({"x", "x2", "multiplier-drift", "full"}));
    sub->add_option("--grid", o.grid, "a:b:step in decades; endpoints > 0 are eps, <= 0 exponents");
    sub->add_option("--direction", o.direction, "fixture or random");
    sub->add_option("--drop-decades", o.drop_decades, "Largest decades left out of the fit");
    sub->add_flag("--no-oracle", o.no_oracle, "Always use the generic solver");
  };

  auto* list = app.add_subcommand("list-builtins", "List built-in problems");
  auto* solve = app.add_subcommand("solve", "Compute a KKT point");
  add_source(solve);
  solve->add_option("--out", o.out, "Write the KKT point as JSON");
  auto* an = app.add_subcommand("analyze", "Check stability conditions at the KKT point");
  add_source(an);
  add_checks(an);
  auto* sw = app.add_subcommand("sweep", "Measure solution drift under canonical perturbations");
  add_source(sw);
  add_sweep(sw);
  sw->add_option("--out", o.out, "Write the CSV here instead of standard output");
  auto* cert = app.add_subcommand("certify", "Compare the theoretical verdict with a sweep");
  add_source(cert);
  add_checks(cert);
  add_sweep(cert);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (list->parsed()) return cmd_list(out);
    if (o.builtin.empty() == o.problem.empty()) throw InputError("exactly one of --builtin or --problem is required");
    if (solve->parsed()) return cmd_solve(o, out, err);
    if (an->parsed()) return cmd_analyze(o, out, err);
    if (sw->parsed()) return cmd_sweep(o, out, err);
    if (cert->parsed()) return cmd_certify(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kInputError;
}

}  // namespace kktstab::cli
