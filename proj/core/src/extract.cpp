#include "herald/extract.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "herald/errors.hpp"

namespace herald {
namespace {

void check_compatible(const TimeTrace& trace, const TemporalMode& mode) {
  if (trace.samples.size() != mode.size()) {
    throw std::invalid_argument("trace has " + std::to_string(trace.samples.size()) + " samples but the mode has " +
                                std::to_string(mode.size()));
  }
  if (std::abs(trace.dt - mode.dt()) > 1e-9 * mode.dt()) {
    throw std::invalid_argument("trace sample period " + std::to_string(trace.dt) + " s differs from the mode's " +
                                std::to_string(mode.dt()) + " s");
  }
}

double project(const TimeTrace& trace, const TemporalMode& mode) {
  const std::span<const double> f = mode.values();
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * trace.samples[k];
  return acc * mode.dt();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

bool parse_double(std::string cell, double& out) {
  while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
  std::size_t first = cell.find_first_not_of(' ');
  if (first == std::string::npos) return false;
  const char* b = cell.data() + first;
  const char* e = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace

QuadratureSample extract_quadrature(const TimeTrace& trace, const TemporalMode& mode) {
  check_compatible(trace, mode);
  return QuadratureSample::reduced(project(trace, mode), trace.theta);
}

std::vector<QuadratureSample> extract_all(std::span<const TimeTrace> traces, const TemporalMode& mode, double scale) {
  std::vector<QuadratureSample> out;
  out.reserve(traces.size());
  for (const TimeTrace& t : traces) {
    QuadratureSample s = extract_quadrature(t, mode);
    s.x *= scale;
    out.push_back(s);
  }
  return out;
}

double shot_noise_scale(std::span<const double> vacuum_quadratures) {
  if (vacuum_quadratures.size() < kMinCalibrationTraces) {
    throw std::invalid_argument("shot-noise calibration needs at least " + std::to_string(kMinCalibrationTraces) +
                                " vacuum traces, got " + std::to_string(vacuum_quadratures.size()));
  }
  double mean = 0.0;
  for (double x : vacuum_quadratures) mean += x;
  mean /= static_cast<double>(vacuum_quadratures.size());
  double var = 0.0;
  for (double x : vacuum_quadratures) var += (x - mean) * (x - mean);
  var /= static_cast<double>(vacuum_quadratures.size() - 1);
  if (!(var > 0.0)) throw std::invalid_argument("vacuum traces have zero variance");
  return std::sqrt(NoiseModel::kVacuumVariance / var);
}

double calibrate_shot_noise(std::span<const TimeTrace> vacuum_traces, const TemporalMode& mode) {
  std::vector<double> xs;
  xs.reserve(vacuum_traces.size());
  for (const TimeTrace& t : vacuum_traces) {
    check_compatible(t, mode);
    xs.push_back(project(t, mode));
  }
  return shot_noise_scale(xs);
}

MultiModeExtractor::MultiModeExtractor(std::span<const double> gammas, double dt, std::size_t n_samples) {
  for (double g : gammas) modes_.push_back(build_temporal_mode(g, dt, n_samples));
  samples_.resize(modes_.size());
}

void MultiModeExtractor::add(const TimeTrace& trace) {
  for (std::size_t i = 0; i < modes_.size(); ++i) samples_[i].push_back(extract_quadrature(trace, modes_[i]));
}

std::vector<double> gamma_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("gamma grid needs finite lo <= hi and a positive step");
  }
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double g = lo + i * step;
    if (g > hi + 1e-3 * step) break;
    grid.push_back(g);
  }
  return grid;
}

void validate_gamma_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("gamma grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw std::invalid_argument("gamma grid values must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("gamma grid must be strictly increasing");
  }
}

GammaScan scan_gamma(std::span<const double> grid, std::span<const std::vector<QuadratureSample>> per_gamma,
                     const TomographySettings& settings) {
  validate_gamma_grid(grid);
  if (per_gamma.size() != grid.size()) throw std::invalid_argument("one sample set per grid point is required");
  GammaScan scan;
  double best_rho11 = -std::numeric_limits<double>::infinity();
  double best_w = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ReconstructionResult r = maxlik_reconstruct(per_gamma[i], settings);
    GammaScanPoint point;
    point.gamma = grid[i];
    point.diagonal = r.rho.diagonal();
    point.rho11 = r.rho.n_max() >= 1 ? r.rho.population(1) : 0.0;
    point.wigner_origin = wigner(r.rho, 0.0, 0.0);
    point.converged = r.converged;
    // strict comparisons keep the smaller gamma on ties
    if (point.rho11 > best_rho11) {
      best_rho11 = point.rho11;
      scan.gamma_star = point.gamma;
    }
    if (point.wigner_origin < best_w) {
      best_w = point.wigner_origin;
      scan.gamma_most_negative = point.gamma;
    }
    scan.curve.push_back(std::move(point));
  }
  return scan;
}

GammaScan scan_gamma(std::span<const TimeTrace> traces, std::span<const double> grid,
                     const TomographySettings& settings, std::span<const TimeTrace> vacuum_traces) {
  validate_gamma_grid(grid);
  if (traces.empty()) throw std::invalid_argument("gamma scan needs traces");
  MultiModeExtractor extractor(grid, traces.front().dt, traces.front().samples.size());
  for (const TimeTrace& t : traces) extractor.add(t);
  std::vector<std::vector<QuadratureSample>> per_gamma(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    per_gamma[i] = extractor.take(i);
    if (!vacuum_traces.empty()) {
      const double scale = calibrate_shot_noise(vacuum_traces, extractor.mode(i));
      for (QuadratureSample& s : per_gamma[i]) s.x *= scale;
    }
  }
  return scan_gamma(grid, per_gamma, settings);
}

std::vector<TimeTrace> read_trace_csv(std::istream& in, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("CSV trace import needs a positive sample period");
  std::vector<TimeTrace> traces;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size() && numeric; ++i) numeric = parse_double(cells[i], values[i]);
    if (!numeric) {
      if (row == 1) continue;
      throw FormatError("trace CSV row " + std::to_string(row) + " is not numeric");
    }
    if (values.size() < 3) throw FormatError("trace CSV row " + std::to_string(row) + " has no samples");
    if (!traces.empty() && values.size() - 2 != traces.front().samples.size()) {
      throw FormatError("trace CSV row " + std::to_string(row) + " has a different sample count");
    }
    if (values[0] < 0.0 || values[0] != std::floor(values[0])) {
      throw FormatError("trace CSV row " + std::to_string(row) + " has an invalid herald_id");
    }
    TimeTrace t;
    t.herald_id = static_cast<std::uint64_t>(values[0]);
    t.theta = values[1];
    t.dt = dt;
    t.samples.assign(values.begin() + 2, values.end());
    traces.push_back(std::move(t));
  }
  return traces;
}

void write_quadrature_csv(std::ostream& out, std::span<const QuadratureSample> samples) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "x,theta\n";
  for (const QuadratureSample& s : samples) out << s.x << ',' << s.theta << '\n';
  out.precision(old_precision);
}

std::vector<QuadratureSample> read_quadrature_csv(std::istream& in) {
  std::vector<QuadratureSample> samples;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv(line);
    double x = 0.0;
    double theta = 0.0;
    const bool ok = cells.size() == 2 && parse_double(cells[0], x) && parse_double(cells[1], theta);
    if (!ok) {
      if (row == 1) continue;
      throw FormatError("quadrature CSV row " + std::to_string(row) + " is not an (x, theta) pair");
    }
    samples.push_back(QuadratureSample::reduced(x, theta));
  }
  return samples;
}

}  // namespace herald
