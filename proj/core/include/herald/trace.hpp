#pragma once

// Raw homodyne traces: the temporal mode of the heralded photon and the
// synthesis of digitizer records that carry one quadrature in that mode.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "herald/fock.hpp"

namespace herald {

/// f(t) = sqrt(pi gamma) exp(-pi gamma |t|), the two-sided exponential mode of
/// a cavity of bandwidth gamma.
double analytic_mode(double gamma, double t);

/// Fraction of the continuous mode's energy inside a centered window of
/// n_samples * dt.
double mode_capture_fraction(double gamma, double dt, std::size_t n_samples);

/// Smallest window (in samples) capturing at least 99.9% of the mode energy.
std::size_t min_mode_samples(double gamma, double dt);

/// Discretized temporal mode, centered in the acquisition window and
/// normalized so that sum_k f_k^2 dt = 1.
class TemporalMode {
 public:
  double gamma() const { return gamma_; }
  double dt() const { return dt_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  // Time of sample k relative to the window center.
  double time(std::size_t k) const;
  // Analytic FWHM of |f(t)|^2: ln 2 / (pi gamma).
  double intensity_fwhm() const;

 private:
  friend TemporalMode build_temporal_mode(double gamma, double dt, std::size_t n_samples);
  TemporalMode(double gamma, double dt, std::vector<double> values)
      : gamma_(gamma), dt_(dt), values_(std::move(values)) {}

  double gamma_;
  double dt_;
  std::vector<double> values_;
};

/// Throws std::invalid_argument naming the minimum n_samples when the window
/// captures less than 99.9% of the mode.
TemporalMode build_temporal_mode(double gamma, double dt, std::size_t n_samples);

/// Inner product sum_k a_k b_k dt.
double mode_overlap(const TemporalMode& a, const TemporalMode& b);

struct NoiseModel {
  static constexpr double kVacuumVariance = 0.5;
  // Electronic noise variance as a fraction of the vacuum variance.
  double electronic_ratio = 0.0;

  static double ratio_from_db(double db_below_vacuum);
};

/// One digitized difference-photocurrent record, in shot-noise-calibrated
/// units: white vacuum noise has variance 1 / (2 dt) per sample.
struct TimeTrace {
  std::vector<double> samples;
  double dt = 0.0;
  double theta = 0.0;
  std::uint64_t herald_id = 0;
};

/// Embeds x_sig in the temporal mode on top of vacuum noise in every
/// orthogonal mode, then adds electronic noise.
void synthesize_trace(double x_sig, const TemporalMode& mode, const NoiseModel& noise, std::mt19937_64& rng,
                      TimeTrace& out);
TimeTrace synthesize_trace(double x_sig, const TemporalMode& mode, const NoiseModel& noise, std::uint64_t seed);

struct PhaseSchedule {
  enum class Kind { ramp, uniform };
  Kind kind = Kind::ramp;
  // Ramp: theta_i = pi * (i mod period) / period.
  std::size_t ramp_period = 1000;

  void validate() const;
};

std::string to_string(PhaseSchedule::Kind kind);
PhaseSchedule::Kind phase_schedule_kind(const std::string& name);

/// Independent per-event seed derived from the run seed and the herald id.
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t herald_id);

struct AcquisitionManifest {
  std::size_t n_events = 0;
  std::size_t n_samples = 0;
  double dt = 0.0;
  double gamma = 0.0;
  double electronic_ratio = 0.0;
  PhaseSchedule schedule;
  std::uint64_t seed = 0;
  std::vector<double> source_diagonal;
  bool source_is_diagonal = true;

  std::string to_json() const;
};

using TraceSink = std::function<void(const TimeTrace&)>;

/// Generates n_events heralded traces from the source state. Traces reach the
/// sink in herald_id order; output is identical for any thread count.
AcquisitionManifest run_acquisition(const DensityMatrix& source, std::size_t n_events, const TemporalMode& mode,
                                    const NoiseModel& noise, const PhaseSchedule& schedule, std::uint64_t seed,
                                    const TraceSink& sink);

std::vector<TimeTrace> run_acquisition(const DensityMatrix& source, std::size_t n_events, const TemporalMode& mode,
                                       const NoiseModel& noise, const PhaseSchedule& schedule, std::uint64_t seed,
                                       AcquisitionManifest* manifest = nullptr);

}  // namespace herald
