#include "qmaxwell/cli.hpp"

#include "qmaxwell/error.hpp"
#include "qmaxwell/io.hpp"
#include "qmaxwell/solver.hpp"
#include "qmaxwell/verify.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace qmaxwell {
namespace {

struct CommonArgs {
  int modes = 0;
  std::optional<int> grid;
  std::string out;
};

struct Args {
  CommonArgs common;
  std::string potential;
  std::string density;
  std::string density_out;
  std::string method = "dual_newton";
  double tol = 1e-9;
  int max_iter = 100;
  int samples = 200;
  std::vector<double> schedule;
  std::uint64_t seed = 0;
};

void setup_logging() {
  auto logger = std::make_shared<spdlog::logger>(
      "qmaxwell", std::make_shared<spdlog::sinks::stderr_sink_mt>());
  logger->set_level(spdlog::level::warn);
  if (const char* level = std::getenv("QMAXWELL_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to "off"; keep the default in that case.
    if (parsed != spdlog::level::off || std::string_view(level) == "off") logger->set_level(parsed);
  }
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(std::move(logger));
}

void add_common(CLI::App* cmd, CommonArgs& common) {
  cmd->add_option("--modes", common.modes, "mode cutoff M")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--grid", common.grid, "quadrature grid size N (>= 4M+1)");
  cmd->add_option("--out", common.out, "output file")->required();
}

SolverOptions solver_options(const Args& args) {
  SolverOptions opts;
  opts.method = parse_solver_method(args.method);
  opts.tol_l2 = args.tol;
  opts.max_iter = args.max_iter;
  if (!args.schedule.empty()) opts.epsilon_schedule = args.schedule;
  opts.validate();
  return opts;
}

int run_forward(const Args& args) {
  const SpectralBasis basis = build_basis(args.common.modes, args.common.grid);
  const ChemicalPotential potential = load_potential(args.potential, basis);
  const DensityOperator rho = gibbs_from_potential(basis, potential);
  write_text_file(args.common.out, format_grid_csv(basis, density_of(rho)));
  spdlog::info("forward: trace {:.15g}, wrote {}", rho.trace(), args.common.out);
  return kExitOk;
}

ReportFile partial_report(const SpectralBasis& basis, const SolverOptions& opts,
                          const SolveReport& report) {
  ReportFile file;
  file.meta = make_report_meta(basis, opts);
  file.result = make_report_result(report);
  file.history = report.history;
  return file;
}

int run_solve(const Args& args) {
  const SpectralBasis basis = build_basis(args.common.modes, args.common.grid);
  const SolverOptions opts = solver_options(args);
  const DensityProfile n = parse_density_csv(args.density, basis);
  try {
    const MaxwellianSolution solution = solve_maxwellian(n, opts);
    write_text_file(args.common.out, serialize_report(make_report(solution, opts)));
    if (!args.density_out.empty()) {
      write_text_file(args.density_out, format_grid_csv(basis, density_of(solution.rho)));
    }
    spdlog::info("solve: {} iterations, residual {:.3e}", solution.report.iterations,
                 solution.report.residual_l2);
    return kExitOk;
  } catch (const MaxIterExceeded& e) {
    write_text_file(args.common.out, serialize_report(partial_report(basis, opts, e.report())));
    throw;
  }
}

int run_verify(const Args& args) {
  const SpectralBasis basis = build_basis(args.common.modes, args.common.grid);
  const SolverOptions opts = solver_options(args);
  if (args.samples < 1) throw InvalidArgument("--samples must be positive");
  const DensityProfile n = parse_density_csv(args.density, basis);
  const MaxwellianSolution solution = solve_maxwellian(n, opts);
  ReportFile report = make_report(solution, opts);
  report.meta.seed = args.seed;
  report.meta.samples = args.samples;
  report.inequalities = run_verification(solution, n, opts, args.samples, args.seed);
  write_text_file(args.common.out, serialize_report(report));
  bool ok = true;
  for (const auto& r : report.inequalities) {
    if (!r.diagnostic && !r.holds) {
      spdlog::error("check {} failed: lhs {:.6e}, rhs {:.6e}", r.name, r.lhs, r.rhs);
      ok = false;
    }
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int run_sweep(const Args& args) {
  const SpectralBasis basis = build_basis(args.common.modes, args.common.grid);
  const SolverOptions opts = solver_options(args);
  const DensityProfile n = parse_density_csv(args.density, basis);
  std::string table = "epsilon,residual_l2,F_eps,A_dist_hminus1\n";
  for (const SweepRow& row : epsilon_sweep(n, opts)) {
    table += fmt::format("{},{},{},{}\n", row.epsilon, row.residual_l2, row.penalized_value,
                         row.potential_distance_hminus1);
  }
  write_text_file(args.common.out, table);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  setup_logging();

  CLI::App app{"Quantum Maxwellian solver on the periodic unit interval", "qmaxwell"};
  app.require_subcommand(1);
  Args args;
  app.add_option("--seed", args.seed, "seed for randomized sweeps");

  auto* forward = app.add_subcommand("forward", "density of exp(-(H+A)) for a given potential");
  add_common(forward, args.common);
  forward->add_option("--potential", args.potential, "file (.json/.csv) or expression")->required();

  auto* solve = app.add_subcommand("solve", "recover the potential of a density");
  add_common(solve, args.common);
  solve->add_option("--density", args.density, "density CSV (x,n)")->required();
  solve->add_option("--method", args.method, "dual_newton|gradient|penalized");
  solve->add_option("--tol", args.tol, "L2 tolerance on the density residual");
  solve->add_option("--max-iter", args.max_iter, "iteration limit");
  solve->add_option("--density-out", args.density_out, "write the achieved density here");

  auto* verify = app.add_subcommand("verify", "solve, then run the inequality suite");
  add_common(verify, args.common);
  verify->add_option("--density", args.density, "density CSV (x,n)")->required();
  verify->add_option("--samples", args.samples, "random instances per inequality");
  verify->add_option("--tol", args.tol, "L2 tolerance on the density residual");
  verify->add_option("--max-iter", args.max_iter, "iteration limit");

  auto* sweep = app.add_subcommand("sweep-epsilon", "penalized solutions along a schedule");
  add_common(sweep, args.common);
  sweep->add_option("--density", args.density, "density CSV (x,n)")->required();
  sweep->add_option("--schedule", args.schedule, "decreasing eps values")->delimiter(',');
  sweep->add_option("--tol", args.tol, "L2 tolerance on the density residual");
  sweep->add_option("--max-iter", args.max_iter, "iteration limit");

  for (auto* cmd : {forward, solve, verify, sweep}) {
    cmd->add_option("--seed", args.seed, "seed for randomized sweeps");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*forward) return run_forward(args);
    if (*solve) return run_solve(args);
    if (*verify) return run_verify(args);
    return run_sweep(args);
  } catch (const MaxIterExceeded& e) {
    spdlog::error("{}", e.what());
    return kExitNotConverged;
  } catch (const BasisTooSmall& e) {
    spdlog::error("{} (try --modes {})", e.what(), e.suggested_modes());
    return kExitNotConverged;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitBadInput;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qmaxwell
