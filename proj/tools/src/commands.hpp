#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "app_config.hpp"
#include "herald/extract.hpp"
#include "herald/fock.hpp"
#include "herald/tomography.hpp"

namespace herald::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

std::string version_string();

struct Context {
  AppConfig config;
  std::uint64_t seed = 1;
  std::filesystem::path out = ".";
};

// --- budget -----------------------------------------------------------------

struct BudgetSummary {
  double eta_opo = 0.0;
  double eta_tot = 0.0;
  double eta = 0.0;  // eta_opo * eta_tot, applied to the heralded state
  double expected_vacuum = 0.0;
  double eta_c = 0.0;
  double two_photon_fraction = 0.0;
  std::vector<double> heralded_diagonal;
  double if_bandwidth = 0.0;
  double finesse = 0.0;
  double cascade_rejection = 0.0;
  double brightness = 0.0;
  double corrected_rate = 0.0;
  std::vector<std::string> notes;
};

BudgetSummary compute_budget(const AppConfig& config);
nlohmann::json to_json(const BudgetSummary& b, const AppConfig& config);

/// Source state the simulator draws quadratures from.
DensityMatrix source_state(const AppConfig& config);

// --- pipeline ---------------------------------------------------------------

struct Check {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
};

struct PipelineResult {
  BudgetSummary budget;
  std::vector<double> source_diagonal;
  double calibration_scale = 1.0;
  double gamma_used = 0.0;
  std::optional<GammaScan> scan;
  std::vector<QuadratureSample> quadratures;
  std::optional<ReconstructionResult> reconstruction;  // always set by run_pipeline
  double wigner_origin = 0.0;
  std::optional<LossInversion> corrected;
  std::vector<double> corrected_renormalized;
  std::vector<Check> checks;
  bool pass = true;
};

/// simulate -> calibrate -> extract (optionally scanning gamma) -> reconstruct
/// -> correct, streaming traces without writing them to disk.
PipelineResult run_pipeline(const AppConfig& config, std::uint64_t seed);
nlohmann::json pipeline_report(const PipelineResult& result, const Context& ctx);

/// Seed of the vacuum reference run derived from the master seed.
std::uint64_t vacuum_seed(std::uint64_t seed);

/// Settings used to rank candidate bandwidths during a scan.
TomographySettings scan_settings(const TomographySettings& base);

nlohmann::json scan_report(const GammaScan& scan);

// --- commands ---------------------------------------------------------------

struct SimulateOptions {
  std::optional<std::size_t> n_events;
};

struct ExtractOptions {
  std::filesystem::path traces;
  std::optional<std::filesystem::path> vacuum;
  std::optional<double> gamma;
  std::optional<std::string> scan;
  bool no_calibration = false;
};

struct ReconstructOptions {
  std::filesystem::path quadratures;
  std::optional<int> n_max;
  std::optional<int> max_iters;
  bool binned = false;
  std::optional<int> bootstrap;
  std::optional<double> correct_eta;
  bool wigner = false;
};

struct PipelineOptions {
  std::optional<std::size_t> n_events;
};

int cmd_simulate(const Context& ctx, const SimulateOptions& opts);
int cmd_extract(const Context& ctx, const ExtractOptions& opts);
int cmd_reconstruct(const Context& ctx, const ReconstructOptions& opts);
int cmd_budget(const Context& ctx);
int cmd_pipeline(const Context& ctx, const PipelineOptions& opts);

/// Full command-line entry point: parses arguments, runs the command and maps
/// errors to exit codes.
int run(int argc, char** argv);

}  // namespace herald::cli
