#pragma once

// Top-level run configuration: the source model plus acquisition, extraction,
// reconstruction and expected-value sections used by the command-line tool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "herald/config.hpp"
#include "herald/tomography.hpp"
#include "herald/trace.hpp"

namespace herald::cli {

struct AcquisitionConfig {
  std::size_t n_events = 50000;
  std::size_t n_vacuum = 5000;
  std::size_t n_samples = 500;
  double dt = 0.2e-9;
  double electronic_ratio = 0.01;
  PhaseSchedule schedule;
};

struct GammaRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

/// "lo:hi:step" in Hz.
GammaRange parse_gamma_range(const std::string& text);

struct ExtractionConfig {
  double gamma = 60e6;
  std::optional<GammaRange> scan;
  bool calibrate = true;
};

struct ReconstructionConfig {
  TomographySettings settings;
  int bootstrap = 0;
  std::optional<double> correct_eta;
  int correct_keep = 2;  // photon numbers kept in the renormalized corrected diagonal
  bool wigner = false;
  double wigner_extent = 4.0;
  int wigner_resolution = 121;
};

struct HeraldingConfig {
  double brightness_bandwidth = 75e6;
};

/// Externally quoted figures the computed values are compared against.
struct ReferenceValues {
  std::optional<double> cascade_rejection;
  std::optional<double> corrected_rate;
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct ExpectedValues {
  std::optional<Band> rho00;
  std::optional<Band> rho11;
  std::optional<Band> rho22;
  std::optional<Band> rho11_corrected;
  std::optional<Band> gamma_star;
  std::optional<double> wigner_origin_max;
  bool empty() const;
};

struct AppConfig {
  SourceConfig source;
  AcquisitionConfig acquisition;
  ExtractionConfig extraction;
  ReconstructionConfig reconstruction;
  HeraldingConfig heralding;
  ReferenceValues reference;
  ExpectedValues expected;
  std::uint64_t seed = 1;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
AppConfig parse_app_config(std::string_view json_text);

/// A missing or unreadable config file is a ConfigError.
AppConfig load_app_config(const std::filesystem::path& path);

nlohmann::json to_json(const AppConfig& config);

}  // namespace herald::cli
