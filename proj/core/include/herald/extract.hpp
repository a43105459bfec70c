#pragma once

// Matched-filter quadrature extraction, shot-noise calibration and the
// temporal-mode bandwidth scan.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "herald/fock.hpp"
#include "herald/tomography.hpp"
#include "herald/trace.hpp"

namespace herald {

inline constexpr std::size_t kMinCalibrationTraces = 100;

/// x = sum_k f_k samples_k dt, paired with the trace phase.
QuadratureSample extract_quadrature(const TimeTrace& trace, const TemporalMode& mode);

std::vector<QuadratureSample> extract_all(std::span<const TimeTrace> traces, const TemporalMode& mode,
                                          double scale = 1.0);

/// sqrt(0.5 / var(x)) for matched-filter outputs of vacuum traces.
double shot_noise_scale(std::span<const double> vacuum_quadratures);
double calibrate_shot_noise(std::span<const TimeTrace> vacuum_traces, const TemporalMode& mode);

/// Projects every trace onto several temporal modes in one pass.
class MultiModeExtractor {
 public:
  MultiModeExtractor(std::span<const double> gammas, double dt, std::size_t n_samples);

  void add(const TimeTrace& trace);
  std::size_t mode_count() const { return modes_.size(); }
  const TemporalMode& mode(std::size_t i) const { return modes_[i]; }
  const std::vector<QuadratureSample>& samples(std::size_t i) const { return samples_[i]; }
  std::vector<QuadratureSample> take(std::size_t i) { return std::move(samples_[i]); }

 private:
  std::vector<TemporalMode> modes_;
  std::vector<std::vector<QuadratureSample>> samples_;
};

/// lo, lo + step, ..., up to hi inclusive (within step / 1000).
std::vector<double> gamma_grid(double lo, double hi, double step);

/// Rejects empty, non-positive, non-finite or non-increasing grids.
void validate_gamma_grid(std::span<const double> grid);

struct GammaScanPoint {
  double gamma = 0.0;
  double rho11 = 0.0;
  double wigner_origin = 0.0;
  std::vector<double> diagonal;
  bool converged = false;
};

struct GammaScan {
  double gamma_star = 0.0;          // argmax rho11, ties to the smaller gamma
  double gamma_most_negative = 0.0; // argmin W(0, 0), same tie rule
  std::vector<GammaScanPoint> curve;
};

/// Reconstructs the state for each candidate bandwidth from already-extracted
/// quadratures (per_gamma[i] belongs to grid[i]).
GammaScan scan_gamma(std::span<const double> grid, std::span<const std::vector<QuadratureSample>> per_gamma,
                     const TomographySettings& settings);

/// Extracts with every grid mode, optionally calibrating each mode on vacuum
/// traces, then scans.
GammaScan scan_gamma(std::span<const TimeTrace> traces, std::span<const double> grid,
                     const TomographySettings& settings, std::span<const TimeTrace> vacuum_traces = {});

// --- CSV adapters -----------------------------------------------------------

/// Rows of herald_id, theta, sample_0, ..., sample_{n-1}. A non-numeric first
/// row is treated as a header. All rows must have the same length.
std::vector<TimeTrace> read_trace_csv(std::istream& in, double dt);

/// Header "x,theta", one sample per row.
void write_quadrature_csv(std::ostream& out, std::span<const QuadratureSample> samples);
std::vector<QuadratureSample> read_quadrature_csv(std::istream& in);

}  // namespace herald
