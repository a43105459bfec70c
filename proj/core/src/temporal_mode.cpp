#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "herald/trace.hpp"

namespace herald {
namespace {

constexpr double kRequiredCapture = 0.999;

void check_grid(double gamma, double dt) {
  if (!(gamma > 0.0) || !(dt > 0.0)) throw std::invalid_argument("mode bandwidth and sample period must be positive");
}

}  // namespace

double analytic_mode(double gamma, double t) {
  return std::sqrt(std::numbers::pi * gamma) * std::exp(-std::numbers::pi * gamma * std::abs(t));
}

double mode_capture_fraction(double gamma, double dt, std::size_t n_samples) {
  check_grid(gamma, dt);
  // integral of f^2 over |t| < T/2 is 1 - exp(-pi gamma T)
  return -std::expm1(-std::numbers::pi * gamma * dt * static_cast<double>(n_samples));
}

std::size_t min_mode_samples(double gamma, double dt) {
  check_grid(gamma, dt);
  const double span = -std::log1p(-kRequiredCapture) / (std::numbers::pi * gamma * dt);
  auto n = static_cast<std::size_t>(std::ceil(span));
  while (mode_capture_fraction(gamma, dt, n) < kRequiredCapture) ++n;
  return n;
}

double TemporalMode::time(std::size_t k) const {
  return (static_cast<double>(k) - 0.5 * static_cast<double>(values_.size() - 1)) * dt_;
}

double TemporalMode::intensity_fwhm() const { return std::numbers::ln2 / (std::numbers::pi * gamma_); }

TemporalMode build_temporal_mode(double gamma, double dt, std::size_t n_samples) {
  check_grid(gamma, dt);
  if (n_samples == 0 || mode_capture_fraction(gamma, dt, n_samples) < kRequiredCapture) {
    throw std::invalid_argument("acquisition window too short for a " + std::to_string(gamma) +
                                " Hz mode: need at least " + std::to_string(min_mode_samples(gamma, dt)) +
                                " samples, got " + std::to_string(n_samples));
  }
  std::vector<double> f(n_samples);
  const double center = 0.5 * static_cast<double>(n_samples - 1);
  double norm2 = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    f[k] = analytic_mode(gamma, (static_cast<double>(k) - center) * dt);
    norm2 += f[k] * f[k] * dt;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (double& v : f) v *= scale;
  return TemporalMode(gamma, dt, std::move(f));
}

double mode_overlap(const TemporalMode& a, const TemporalMode& b) {
  if (a.size() != b.size() || a.dt() != b.dt()) throw std::invalid_argument("modes live on different time grids");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc * a.dt();
}

}  // namespace herald
