#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "herald/errors.hpp"
#include "herald/parallel.hpp"

namespace herald::cli {
namespace {

int parse_thread_env(const char* text) {
  std::size_t used = 0;
  int n = 0;
  try {
    n = std::stoi(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || text[used] != '\0' || n < 1) {
    throw ConfigError(std::string("HERALD_THREADS must be a positive integer, got '") + text + "'");
  }
  return n;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Heralded single-photon source simulation and homodyne tomography"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out = ".";
  int threads = 0;
  CLI::Option* config_opt = app.add_option("--config", config_path, "JSON run configuration");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out", out, "Output directory")->capture_default_str();
  CLI::Option* threads_opt =
      app.add_option("--threads", threads, "Worker threads (falls back to HERALD_THREADS)")->check(CLI::PositiveNumber);

  SimulateOptions sim;
  std::size_t sim_events = 0;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Synthesize heralded and vacuum-reference traces");
  CLI::Option* sim_events_opt = sim_cmd->add_option("--events", sim_events, "Number of heralding events");

  ExtractOptions ext;
  std::string ext_traces, ext_vacuum, ext_scan;
  double ext_gamma = 0.0;
  CLI::App* ext_cmd = app.add_subcommand("extract", "Matched-filter quadratures from traces");
  ext_cmd->add_option("--traces", ext_traces, "Trace file (.htrc or .csv)")->required();
  CLI::Option* ext_vacuum_opt = ext_cmd->add_option("--vacuum", ext_vacuum, "Vacuum reference trace file");
  CLI::Option* ext_gamma_opt = ext_cmd->add_option("--gamma", ext_gamma, "Mode bandwidth in Hz");
  CLI::Option* ext_scan_opt = ext_cmd->add_option("--scan", ext_scan, "Bandwidth scan lo:hi:step in Hz");
  ext_gamma_opt->excludes(ext_scan_opt);
  ext_cmd->add_flag("--no-calibration", ext.no_calibration, "Skip shot-noise calibration");

  ReconstructOptions rec;
  std::string rec_input;
  int rec_n_max = 0, rec_iters = 0, rec_boot = 0;
  double rec_eta = 0.0;
  CLI::App* rec_cmd = app.add_subcommand("reconstruct", "MaxLik density matrix from quadratures");
  rec_cmd->add_option("--quadratures", rec_input, "Quadrature CSV (x,theta)")->required();
  CLI::Option* rec_n_max_opt = rec_cmd->add_option("--n-max", rec_n_max, "Fock truncation");
  CLI::Option* rec_iters_opt = rec_cmd->add_option("--max-iters", rec_iters, "Iteration cap");
  rec_cmd->add_flag("--binned", rec.binned, "Bin projectors on an x/theta grid");
  CLI::Option* rec_boot_opt = rec_cmd->add_option("--bootstrap", rec_boot, "Bootstrap resamples for error bars");
  CLI::Option* rec_eta_opt = rec_cmd->add_option("--correct-eta", rec_eta, "Invert a loss of efficiency eta");
  rec_cmd->add_flag("--wigner", rec.wigner, "Write the Wigner function grid");

  CLI::App* budget_cmd = app.add_subcommand("budget", "Efficiency, filter and rate arithmetic");

  PipelineOptions pipe;
  std::size_t pipe_events = 0;
  CLI::App* pipe_cmd = app.add_subcommand("pipeline", "Simulate, extract, reconstruct, correct and check");
  CLI::Option* pipe_events_opt = pipe_cmd->add_option("--events", pipe_events, "Number of heralding events");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Context ctx;
    ctx.config = *config_opt ? load_app_config(config_path) : AppConfig{};
    ctx.seed = *seed_opt ? seed : ctx.config.seed;
    ctx.config.seed = ctx.seed;
    ctx.out = out;
    if (*threads_opt) {
      set_thread_count(threads);
    } else if (const char* env = std::getenv("HERALD_THREADS")) {
      set_thread_count(parse_thread_env(env));
    }
    std::error_code ec;
    std::filesystem::create_directories(ctx.out, ec);
    if (ec) throw IoError("cannot create output directory '" + out + "': " + ec.message());

    if (*sim_cmd) {
      if (*sim_events_opt) sim.n_events = sim_events;
      return cmd_simulate(ctx, sim);
    }
    if (*ext_cmd) {
      ext.traces = ext_traces;
      if (*ext_vacuum_opt) ext.vacuum = ext_vacuum;
      if (*ext_gamma_opt) ext.gamma = ext_gamma;
      if (*ext_scan_opt) ext.scan = ext_scan;
      return cmd_extract(ctx, ext);
    }
    if (*rec_cmd) {
      rec.quadratures = rec_input;
      if (*rec_n_max_opt) rec.n_max = rec_n_max;
      if (*rec_iters_opt) rec.max_iters = rec_iters;
      if (*rec_boot_opt) rec.bootstrap = rec_boot;
      if (*rec_eta_opt) rec.correct_eta = rec_eta;
      return cmd_reconstruct(ctx, rec);
    }
    if (*budget_cmd) return cmd_budget(ctx);
    if (*pipe_cmd) {
      if (*pipe_events_opt) pipe.n_events = pipe_events;
      return cmd_pipeline(ctx, pipe);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "input format error: " << e.what() << '\n';
    return kExitIo;
  } catch (const TomographyError& e) {
    std::cerr << "input data error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace herald::cli
