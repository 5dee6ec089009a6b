// command-line front end: generate problems, run the equation solvers, and
// emit CSV tables plus a reproducibility manifest per run

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lradi/dre.hpp"
#include "lradi/lyap_adi.hpp"
#include "lradi/oracle.hpp"
#include "lradi/problems.hpp"
#include "lradi/report.hpp"
#include "lradi/riccati.hpp"

namespace fs = std::filesystem;
using namespace lradi;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_no_convergence = 2;

// Either a bundle directory (anything with a problem.manifest) or an inline
// generator spec "heat:grid=16,dim=2,inputs=2,outputs=2,beta=1,mass=lumped,seed=7".
GeneratedProblem load_problem(const std::string& spec) {
  if (spec.rfind("heat:", 0) == 0 || spec == "heat") {
    HeatProblemOptions opt;
    if (spec.size() > 5) {
      std::istringstream rest(spec.substr(5));
      std::string item;
      while (std::getline(rest, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
          throw structural_error("generator spec: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        try {
          if (key == "grid")
            opt.grid = std::stoi(value);
          else if (key == "dim")
            opt.dim = std::stoi(value);
          else if (key == "inputs")
            opt.inputs = std::stoi(value);
          else if (key == "outputs")
            opt.outputs = std::stoi(value);
          else if (key == "beta")
            opt.beta = std::stod(value);
          else if (key == "seed")
            opt.seed = std::stoull(value);
          else if (key == "mass") {
            if (value == "identity")
              opt.mass = HeatProblemOptions::Mass::identity;
            else if (value == "lumped")
              opt.mass = HeatProblemOptions::Mass::lumped;
            else
              throw structural_error("generator spec: mass must be identity or lumped");
          } else
            throw structural_error("generator spec: unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
          throw structural_error("generator spec: bad value for '" + key + "'");
        }
      }
    }
    return generate_heat_problem(opt);
  }
  return read_problem_bundle(spec);
}

std::vector<std::pair<std::string, std::string>> problem_manifest_entries(
    const std::string& spec, const GeneratedProblem& p) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("problem", spec);
  kv.emplace_back("problem.n", std::to_string(p.A.rows()));
  kv.emplace_back("problem.m", std::to_string(p.B.cols()));
  kv.emplace_back("problem.q", std::to_string(p.C.rows()));
  for (const auto& [key, value] : p.metadata) kv.emplace_back("problem." + key, value);
  return kv;
}

LowRankFactor read_factor(const fs::path& dir) {
  LowRankFactor X;
  X.Z = read_matrix_market_dense(dir / "Z.mtx");
  X.Y = read_matrix_market_dense(dir / "Y.mtx");
  X.check();
  return X;
}

void write_factor(const fs::path& dir, const LowRankFactor& X) {
  write_matrix_market(dir / "Z.mtx", X.Z);
  write_matrix_market(dir / "Y.mtx", X.Y);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct CommonArgs {
  std::string problem;
  std::string out;
  std::string shifts = "heur:10,10,10";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_shifts = true) {
  cmd->add_option("--problem", a.problem, "problem bundle directory or generator spec (heat:...)")
      ->required();
  cmd->add_option("--out", a.out, "output directory for CSV tables and the run manifest")
      ->required();
  if (needs_shifts)
    cmd->add_option("--shifts", a.shifts,
                    "shift strategy: heur:<count>,<steps+>,<steps-> or proj:<heur|decr|incr>:<window>");
  cmd->add_option("--seed", a.seed, "seed for randomized pieces (overrides the strategy default)")
      ->trigger_on_parse()
      ->each([&a](const std::string&) { a.seed_given = true; });
  cmd->add_option("--workers", a.workers, "sweep worker budget (cells run sequentially here)")
      ->check(CLI::PositiveNumber);
}

ShiftStrategy strategy_for(const CommonArgs& a) {
  ShiftStrategy s = ShiftStrategy::parse(a.shifts);
  if (a.seed_given) s.seed = a.seed;
  return s;
}

void manifest_common(std::vector<std::pair<std::string, std::string>>& kv, const CommonArgs& a,
                     const ShiftStrategy& s) {
  kv.emplace_back("shifts", s.describe());
  kv.emplace_back("seed", std::to_string(s.seed));
  kv.emplace_back("workers", std::to_string(a.workers));
}

// ---------------------------------------------------------------------------

int run_lyap(const CommonArgs& a, const std::string& init, double reltol, double abstol,
             int max_iters) {
  const GeneratedProblem gp = load_problem(a.problem);
  LyapunovProblem p;
  p.A = gp.A;
  p.E = gp.E;
  p.G = gp.B;
  p.S = MatrixXd::Identity(gp.B.cols(), gp.B.cols());
  p.U.resize(p.n(), 0);
  p.V.resize(p.n(), 0);

  AdiOptions opt;
  if (abstol > 0)
    opt.abstol = abstol;
  else
    opt.reltol = reltol;
  opt.max_iters = max_iters;

  LowRankFactor X0 = LowRankFactor::zero(p.n());
  if (init.rfind("file:", 0) == 0)
    X0 = read_factor(init.substr(5));
  else if (init != "zero")
    throw structural_error("lyap: --init must be zero or file:<dir>");

  const ShiftStrategy strat = strategy_for(a);
  auto provider = strat.make_provider();
  const AdiResult res = solve_lyapunov(p, X0, *provider, opt);

  fs::create_directories(a.out);
  write_lyap_trace_csv(fs::path(a.out) / "lyap_trace.csv", res.trace);
  write_factor(a.out, res.X);

  auto kv = problem_manifest_entries(a.problem, gp);
  kv.emplace_back("subcommand", "lyap");
  kv.emplace_back("init", init);
  if (opt.abstol)
    kv.emplace_back("abstol", fmt(*opt.abstol));
  else
    kv.emplace_back("reltol", fmt(*opt.reltol));
  kv.emplace_back("max_iters", std::to_string(max_iters));
  manifest_common(kv, a, strat);
  kv.emplace_back("iterations", std::to_string(res.trace.iterations));
  kv.emplace_back("final_residual", fmt(res.trace.final_residual));
  kv.emplace_back("converged", res.converged ? "true" : "false");
  write_run_manifest(fs::path(a.out) / "manifest.txt", kv);

  for (const std::string& w : res.trace.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "lyap: " << res.trace.iterations << " iterations, residual "
            << res.trace.final_residual << " (threshold " << res.trace.threshold << "), rank "
            << res.X.cols() << '\n';
  return res.converged ? exit_ok : exit_no_convergence;
}

// ---------------------------------------------------------------------------

NewtonSweepRow::Cell newton_cell(const NewtonResult& r) {
  NewtonSweepRow::Cell c;
  c.converged = r.converged;
  c.newton_steps = static_cast<int>(r.trace.steps.size());
  c.adi_steps = r.trace.total_adi_iterations;
  c.solves = r.trace.total_solves;
  c.rank = r.X.cols();
  c.t_compress = r.trace.t_compress;
  c.t_shifts = r.trace.t_shifts;
  c.t_solve = r.trace.t_solve;
  c.t_total = r.trace.t_total;
  return c;
}

int run_newton(const CommonArgs& a, const std::string& mode, bool line_search,
               const std::string& init, double reltol, int max_iters, int adi_max_iters,
               bool sweep) {
  const GeneratedProblem gp = load_problem(a.problem);
  const RiccatiProblem p = gp.riccati();
  const ShiftStrategy strat = strategy_for(a);

  NewtonOptions base;
  base.reltol = reltol;
  base.max_iters = max_iters;
  base.adi_max_iters = adi_max_iters;
  base.shifts = strat;

  fs::create_directories(a.out);
  auto kv = problem_manifest_entries(a.problem, gp);
  kv.emplace_back("subcommand", "newton");
  kv.emplace_back("reltol", fmt(reltol));
  kv.emplace_back("max_iters", std::to_string(max_iters));
  kv.emplace_back("adi_max_iters", std::to_string(adi_max_iters));
  manifest_common(kv, a, strat);

  if (sweep) {
    std::vector<NewtonSweepRow> rows;
    for (const NewtonMode m : {NewtonMode::classical, NewtonMode::inexact, NewtonMode::hybrid})
      for (const bool ls : {false, true}) {
        NewtonSweepRow row;
        row.mode = to_string(m);
        row.line_search = ls ? "on" : "off";
        row.shifts = strat.describe();
        for (const bool warm : {false, true}) {
          NewtonOptions opt = base;
          opt.mode = m;
          opt.line_search = ls;
          opt.warm_start = warm;
          const NewtonResult r = solve_riccati_newton(p, opt);
          (warm ? row.new_init : row.old_init) = newton_cell(r);
          std::cout << "newton sweep: mode=" << row.mode << " line_search=" << row.line_search
                    << " init=" << (warm ? "new" : "old") << " -> "
                    << (r.converged ? "converged" : "max-iterations") << " in "
                    << r.trace.steps.size() << " steps, " << r.trace.total_adi_iterations
                    << " inner iterations\n";
        }
        rows.push_back(std::move(row));
      }
    write_newton_sweep_csv(fs::path(a.out) / "newton_sweep.csv", rows);
    kv.emplace_back("sweep", "mode x line_search x init");
    write_run_manifest(fs::path(a.out) / "manifest.txt", kv);
    return exit_ok;
  }

  NewtonOptions opt = base;
  opt.mode = parse_newton_mode(mode);
  opt.line_search = line_search;
  if (init == "new")
    opt.warm_start = true;
  else if (init == "old")
    opt.warm_start = false;
  else
    throw structural_error("newton: --init must be old (zero inner start) or new (warm)");

  const NewtonResult r = solve_riccati_newton(p, opt);
  write_newton_steps_csv(fs::path(a.out) / "newton_steps.csv", r.trace);
  write_factor(a.out, r.X);
  kv.emplace_back("mode", mode);
  kv.emplace_back("line_search", line_search ? "on" : "off");
  kv.emplace_back("init", init);
  kv.emplace_back("newton_steps", std::to_string(r.trace.steps.size()));
  kv.emplace_back("final_residual", fmt(r.trace.final_residual));
  kv.emplace_back("converged", r.converged ? "true" : "false");
  write_run_manifest(fs::path(a.out) / "manifest.txt", kv);

  for (const std::string& w : r.trace.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "newton: " << r.trace.steps.size() << " steps, "
            << r.trace.total_adi_iterations << " inner iterations, residual "
            << r.trace.final_residual << ", rank " << r.X.cols() << '\n';
  return r.converged ? exit_ok : exit_no_convergence;
}

// ---------------------------------------------------------------------------

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return s;
}

int run_dre(const CommonArgs& a, double t0, double tf, std::vector<int> steps_list,
            const std::vector<std::string>& inits, double reltol, int adi_max_iters) {
  const GeneratedProblem gp = load_problem(a.problem);
  const RiccatiProblem p = gp.riccati();
  const ShiftStrategy strat = strategy_for(a);

  fs::create_directories(a.out);
  std::vector<DreSummaryRow> rows;
  bool single_failed = false;
  for (const int steps : steps_list)
    for (const std::string& init : inits) {
      DreOptions opt;
      opt.t0 = t0;
      opt.tf = tf;
      opt.steps = steps;
      opt.adi_reltol = reltol;
      opt.adi_max_iters = adi_max_iters;
      opt.shifts = strat;
      opt.store_trajectory = false;
      if (init == "warm")
        opt.warm_start = true;
      else if (init == "zero")
        opt.warm_start = false;
      else
        throw structural_error("dre: --init must be warm or zero");

      const DreResult r = integrate_dre(p, opt);
      DreSummaryRow row;
      row.time_steps = steps;
      row.shifts = strat.describe();
      row.init = init;
      row.converged = r.converged;
      row.steps_completed = static_cast<int>(r.trace.steps.size());
      row.adi_iterations = r.trace.total_adi_iterations;
      row.solves = r.trace.total_solves;
      for (const DreStepRecord& s : r.trace.steps)
        row.max_solution_cols = std::max(row.max_solution_cols, s.iterate_cols);
      row.final_solution_cols = r.X.empty() ? 0 : r.X.back().cols();
      row.t_compress = r.trace.t_compress;
      row.t_shifts = r.trace.t_shifts;
      row.t_solve = r.trace.t_solve;
      row.t_total = r.trace.t_total;
      rows.push_back(row);

      const std::string cell = "dre_steps_" + std::to_string(steps) + "_" + init + "_" +
                               sanitize(strat.describe()) + ".csv";
      write_dre_step_csv(fs::path(a.out) / cell, r.trace);
      if (steps_list.size() == 1 && inits.size() == 1) {
        write_factor(a.out, r.X.back());
        single_failed = !r.converged;
      }
      for (const std::string& w : r.trace.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "dre: steps=" << steps << " init=" << init << " -> "
                << (r.converged ? "converged" : "non-converged inner solve") << ", "
                << r.trace.total_adi_iterations << " inner iterations\n";
    }
  write_dre_summary_csv(fs::path(a.out) / "dre_summary.csv", rows);

  auto kv = problem_manifest_entries(a.problem, gp);
  kv.emplace_back("subcommand", "dre");
  kv.emplace_back("t0", fmt(t0));
  kv.emplace_back("tf", fmt(tf));
  std::string sl;
  for (const int s : steps_list) sl += (sl.empty() ? "" : " ") + std::to_string(s);
  kv.emplace_back("steps", sl);
  kv.emplace_back("reltol", fmt(reltol));
  kv.emplace_back("adi_max_iters", std::to_string(adi_max_iters));
  manifest_common(kv, a, strat);
  write_run_manifest(fs::path(a.out) / "manifest.txt", kv);
  return single_failed ? exit_no_convergence : exit_ok;
}

// ---------------------------------------------------------------------------

int run_shift_analysis(const CommonArgs& a, const std::vector<std::string>& orderings) {
  const GeneratedProblem gp = load_problem(a.problem);
  if (gp.A.rows() > 400)
    throw structural_error("shift-analysis needs a desk-scale problem (order <= 400)");
  const MatrixXd A(gp.A), E(gp.E);
  const std::vector<Complex> spectrum = oracle::generalized_spectrum(A, E);

  std::vector<ShiftCurvePoint> points;
  for (const std::string& name : orderings) {
    const ShiftOrder order = parse_shift_order(name);
    const std::vector<Complex> ordered = sort_conjugate_adjacent(spectrum, order);
    const std::vector<double> rho = oracle::rho_hat_curve(A, E, ordered);
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      ShiftCurvePoint pt;
      pt.ordering = name;
      pt.k = static_cast<int>(k);
      pt.shift = ordered[k];
      pt.radius = oracle::cayley_radius(A, E, ordered[k]);
      pt.rho_hat = rho[k];
      points.push_back(pt);
    }
  }

  fs::create_directories(a.out);
  write_shift_curves_csv(fs::path(a.out) / "shift_curves.csv", points);
  auto kv = problem_manifest_entries(a.problem, gp);
  kv.emplace_back("subcommand", "shift-analysis");
  std::string ol;
  for (const std::string& o : orderings) ol += (ol.empty() ? "" : " ") + o;
  kv.emplace_back("orderings", ol);
  kv.emplace_back("spectrum_size", std::to_string(spectrum.size()));
  write_run_manifest(fs::path(a.out) / "manifest.txt", kv);
  std::cout << "shift-analysis: " << points.size() << " curve points over " << orderings.size()
            << " orderings\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank solvers for Lyapunov, Riccati, and differential Riccati equations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a key=value config file");

  CommonArgs lyap_args;
  std::string lyap_init = "zero";
  double lyap_reltol = 1e-10, lyap_abstol = 0.0;
  int lyap_max_iters = 100;
  CLI::App* lyap = app.add_subcommand("lyap", "solve one generalized Lyapunov equation");
  add_common(lyap, lyap_args);
  lyap->add_option("--init", lyap_init, "initial value: zero or file:<dir with Z.mtx/Y.mtx>");
  lyap->add_option("--reltol", lyap_reltol, "residual tolerance relative to the right-hand side");
  lyap->add_option("--abstol", lyap_abstol, "absolute residual tolerance (overrides --reltol)");
  lyap->add_option("--max-iters", lyap_max_iters, "iteration cap");

  CommonArgs newton_args;
  std::string newton_mode = "classical", newton_init = "new";
  bool newton_ls = false, newton_sweep = false;
  double newton_reltol = 1e-10;
  int newton_max_iters = 30, newton_adi_max = 200;
  CLI::App* newton = app.add_subcommand("newton", "solve an algebraic Riccati equation");
  add_common(newton, newton_args);
  newton->add_option("--mode", newton_mode, "inner tolerance rule: classical, inexact, or hybrid");
  newton->add_flag("--line-search", newton_ls, "enable the backtracking line search");
  newton->add_option("--init", newton_init, "inner start: old (zero) or new (current iterate)");
  newton->add_option("--reltol", newton_reltol, "outer residual tolerance");
  newton->add_option("--max-iters", newton_max_iters, "outer iteration cap");
  newton->add_option("--adi-max-iters", newton_adi_max, "inner iteration cap");
  newton->add_flag("--sweep", newton_sweep, "run the mode x line-search x init comparison table");

  CommonArgs dre_args;
  double dre_t0 = 0.0, dre_tf = 1.0, dre_reltol = 1e-10;
  std::vector<int> dre_steps{10};
  std::vector<std::string> dre_inits{"warm"};
  int dre_adi_max = 200;
  CLI::App* dre = app.add_subcommand("dre", "integrate a differential Riccati equation");
  add_common(dre, dre_args);
  dre->add_option("--t0", dre_t0, "start time");
  dre->add_option("--tf", dre_tf, "end time");
  dre->add_option("--steps", dre_steps, "time step counts (repeat to sweep)");
  dre->add_option("--init", dre_inits, "inner start per step: warm or zero (repeat to sweep)");
  dre->add_option("--reltol", dre_reltol, "inner residual tolerance");
  dre->add_option("--adi-max-iters", dre_adi_max, "inner iteration cap");

  CommonArgs shift_args;
  std::vector<std::string> orderings{"heur", "decr", "incr"};
  CLI::App* shifts = app.add_subcommand(
      "shift-analysis", "contraction-rate curves for shift orderings of the exact spectrum");
  add_common(shifts, shift_args, /*needs_shifts=*/false);
  shifts->add_option("--orderings", orderings, "orderings to compare: heur, decr, incr");

  HeatProblemOptions gen_opt;
  std::string gen_mass = "identity", gen_out;
  CLI::App* gen = app.add_subcommand("gen-problem", "generate a heat-equation problem bundle");
  gen->add_option("--grid", gen_opt.grid, "interior grid points per dimension");
  gen->add_option("--dim", gen_opt.dim, "spatial dimension (1 or 2)");
  gen->add_option("--inputs", gen_opt.inputs, "input columns");
  gen->add_option("--outputs", gen_opt.outputs, "output rows");
  gen->add_option("--beta", gen_opt.beta, "input scaling");
  gen->add_option("--mass", gen_mass, "mass matrix: identity or lumped");
  gen->add_option("--seed", gen_opt.seed, "seed for node placement and the lumped mass");
  gen->add_option("--out", gen_out, "bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*lyap)
      return run_lyap(lyap_args, lyap_init, lyap_reltol, lyap_abstol, lyap_max_iters);
    if (*newton)
      return run_newton(newton_args, newton_mode, newton_ls, newton_init, newton_reltol,
                        newton_max_iters, newton_adi_max, newton_sweep);
    if (*dre)
      return run_dre(dre_args, dre_t0, dre_tf, dre_steps, dre_inits, dre_reltol, dre_adi_max);
    if (*shifts) return run_shift_analysis(shift_args, orderings);
    if (*gen) {
      if (gen_mass == "lumped")
        gen_opt.mass = HeatProblemOptions::Mass::lumped;
      else if (gen_mass != "identity")
        throw structural_error("gen-problem: --mass must be identity or lumped");
      write_problem_bundle(gen_out, generate_heat_problem(gen_opt));
      std::cout << "wrote problem bundle to " << gen_out << '\n';
      return exit_ok;
    }
  } catch (const structural_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
