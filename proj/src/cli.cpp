#include "fracvolt/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "fracvolt/config.hpp"
#include "fracvolt/energy.hpp"
#include "fracvolt/report.hpp"
#include "fracvolt/suites.hpp"

namespace fracvolt {

namespace {

namespace fs = std::filesystem;

int cmd_run(const std::string& config_path, const std::string& out_override, bool dump,
            std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  if (dump) {
    out << cfg.dump();
    return kExitOk;
  }

  std::optional<ScaledSolve> run;
  try {
    run.emplace(
        solve_rescaled(cfg.problem(), cfg.N, cfg.effective_grading(), cfg.solver_options()));
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  const SolutionTrace& trace = run->trace;

  std::vector<std::string> notes;
  AprioriDiagnostics diag;
  bool have_diag = false;
  try {
    diag = diagnose_apriori(trace, trace.f);
    have_diag = true;
  } catch (const std::exception& e) {
    notes.push_back(std::string("diagnostics unavailable: ") + e.what());
  }
  for (const auto& w : trace.warnings) err << "warning: " << w << "\n";

  const fs::path dir = out_override.empty() ? fs::path(cfg.out_dir) : fs::path(out_override);
  const fs::path csv = dir / cfg.trace_file;
  const fs::path json = dir / cfg.summary_file;
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    write_trace_csv(csv.string(), trace.u);
    write_json(json.string(),
               run_summary(cfg, trace, run->factor, have_diag ? &diag : nullptr, notes));
  } catch (const std::exception& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  out << "wrote " << csv.string() << " and " << json.string() << " ("
      << trace.u.node_count() << " nodes, residual max "
      << (trace.residual.size() ? trace.residual.maxCoeff() : 0.0) << ")\n";
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::vector<Scalar> alphas,
               int draws, const std::string& report_path, std::ostream& out, std::ostream& err) {
  if (alphas.empty()) alphas = kDefaultSuiteAlphas;
  for (Scalar a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) {
      err << "error: --alpha values must lie in (0, 1], got " << a << "\n";
      return kExitUsage;
    }
  }
  if (draws < 1) {
    err << "error: --draws must be >= 1\n";
    return kExitUsage;
  }
  const unsigned threads = thread_count();
  SuiteReport report;
  try {
    if (suite == "lemmas") {
      report = verify_lemmas(seed, alphas, draws, 64, threads);
    } else if (suite == "solver") {
      report = verify_solver(seed, alphas, threads);
    } else {
      report = verify_oracle(seed, alphas, threads);
    }
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  const Json j = report.json();
  if (report_path.empty()) {
    out << j.dump(2) << "\n";
  } else {
    try {
      write_json(report_path, j);
    } catch (const std::exception& e) {
      err << "I/O error: " << e.what() << "\n";
      return kExitIo;
    }
  }
  std::size_t failed = 0;
  for (const auto& c : report.checks) {
    if (!c.pass) {
      ++failed;
      err << "FAIL " << c.name << " (value " << c.value << ", tolerance " << c.tolerance << ")\n";
    }
  }
  err << "verify " << suite << ": " << report.checks.size() << " checks, " << failed
      << " failed\n";
  return failed == 0 ? kExitOk : kExitCheckFailed;
}

int cmd_convergence(const std::string& config_path, const std::vector<Index>& grid,
                    const std::string& csv_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
  if (grid.size() < 3) {
    err << "error: --grid needs at least 3 entries\n";
    return kExitUsage;
  }
  ConvergenceResult result;
  try {
    result = convergence_study(cfg, grid);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  if (csv_path.empty()) {
    write_convergence_csv(out, result);
  } else {
    std::ofstream f(csv_path);
    if (f) write_convergence_csv(f, result);
    if (!f) {
      err << "I/O error: cannot write '" << csv_path << "'\n";
      return kExitIo;
    }
  }
  err << "reference " << result.reference << ", minimum order " << result.min_order
      << (result.monotone ? ", monotone" : ", not monotone")
      << (result.graded ? "" : " (uniform mesh, order not checked)") << "\n";
  return result.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-fractional advection-diffusion-reaction solver and verification suites",
               "fracvolt"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Solve the problem described by a config file");
  std::string run_config;
  std::string run_out;
  bool dump = false;
  run->add_option("--config", run_config, "Config file")->required();
  run->add_option("--out", run_out, "Output directory (overrides output.dir)");
  run->add_flag("--dump-config", dump, "Print the resolved config and exit");

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  std::uint64_t seed = 42;
  std::vector<Scalar> alphas;
  int draws = 100;
  std::string report_path;
  verify->add_option("suite", suite, "lemmas, solver or oracle")
      ->required()
      ->check(CLI::IsMember({"lemmas", "solver", "oracle"}));
  verify->add_option("--seed", seed, "Random seed")->capture_default_str();
  verify->add_option("--alpha", alphas, "Comma-separated orders")->delimiter(',');
  verify->add_option("--draws", draws, "Random inputs per order (lemmas)")->capture_default_str();
  verify->add_option("--report", report_path, "Write the JSON report here instead of stdout");

  auto* conv = app.add_subcommand("convergence", "Measure the convergence order");
  std::string conv_config;
  std::vector<Index> grid;
  std::string conv_out;
  conv->add_option("--config", conv_config, "Config file")->required();
  conv->add_option("--grid", grid, "Comma-separated N values")->required()->delimiter(',');
  conv->add_option("--out", conv_out, "Write the CSV table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (*run) return cmd_run(run_config, run_out, dump, out, err);
  if (*verify) return cmd_verify(suite, seed, alphas, draws, report_path, out, err);
  return cmd_convergence(conv_config, grid, conv_out, out, err);
}

}  // namespace fracvolt
