#include "herald/opo.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace herald {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

std::vector<double> normalized(std::vector<double> p) {
  double total = 0.0;
  for (double v : p) total += v;
  require(total > 0.0 && std::isfinite(total), "photon-number distribution has no weight");
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

void OpoParams::validate() const {
  require(t_out > 0.0 && t_out < 1.0, "opo.t_out must lie in (0, 1)");
  require(l_intra >= 0.0 && l_intra < 1.0, "opo.l_intra must lie in [0, 1)");
  require(gamma > 0.0, "opo.gamma must be positive");
  require(delta_fsr > 0.0, "opo.delta_fsr must be positive");
  require(pump_ratio > 0.0 && pump_ratio < 1.0, "opo.pump_ratio must lie in (0, 1): the model is below threshold");
  require(pair_exponent > 0.0, "opo.pair_exponent must be positive");
}

double OpoParams::pair_amplitude() const { return std::pow(pump_ratio, pair_exponent); }

void EfficiencyBudget::validate() const {
  for (double v : {eta_noise, eta_phot, eta_prop, visibility}) {
    require(v > 0.0 && v <= 1.0, "budget efficiencies must lie in (0, 1]");
  }
}

void ConditioningPath::validate() const {
  require(is_fraction(eta_det) && is_fraction(transmission), "conditioning efficiencies must lie in [0, 1]");
  require(dark_rate >= 0.0 && herald_rate >= 0.0, "conditioning rates must be non-negative");
}

void FilterSpec::validate() const {
  require(if_bandwidth > 0.0, "filters.if_bandwidth must be positive");
  require(fp_bandwidth > 0.0 && fp_fsr > fp_bandwidth, "filters need fp_fsr > fp_bandwidth > 0");
}

double wavelength_width_to_frequency(double width_m, double center_wavelength_m) {
  constexpr double kSpeedOfLight = 299792458.0;
  require(width_m > 0.0 && center_wavelength_m > 0.0, "wavelengths must be positive");
  return kSpeedOfLight * width_m / (center_wavelength_m * center_wavelength_m);
}

double escape_efficiency(double t_out, double l_intra) {
  require(t_out >= 0.0 && l_intra >= 0.0, "transmission and loss must be non-negative");
  require(t_out + l_intra > 0.0, "escape efficiency undefined when transmission and loss are both zero");
  return t_out / (t_out + l_intra);
}

double total_detection_efficiency(const EfficiencyBudget& budget) {
  budget.validate();
  return budget.eta_noise * budget.eta_phot * budget.eta_vis() * budget.eta_prop;
}

double expected_vacuum(double eta_tot, double eta_opo) {
  require(is_fraction(eta_tot) && is_fraction(eta_opo), "efficiencies must lie in [0, 1]");
  return 1.0 - eta_tot * eta_opo;
}

std::vector<double> conditional_distribution(double lambda, double eta_c, int n_max) {
  require(lambda > 0.0 && lambda < 1.0, "pair amplitude must lie in (0, 1)");
  require(is_fraction(eta_c) && eta_c > 0.0, "heralding efficiency must lie in (0, 1]");
  require(n_max >= 1, "n_max must be at least 1");
  std::vector<double> p(n_max + 1, 0.0);
  const double l2 = lambda * lambda;
  for (int n = 1; n <= n_max; ++n) {
    // 1 - (1 - eta)^n without cancellation for small eta
    const double click = -std::expm1(n * std::log1p(-eta_c));
    p[n] = std::pow(l2, n) * click;
  }
  return normalized(std::move(p));
}

std::vector<double> unconditional_distribution(double lambda, int n_max) {
  require(lambda >= 0.0 && lambda < 1.0, "pair amplitude must lie in [0, 1)");
  std::vector<double> p(n_max + 1);
  const double l2 = lambda * lambda;
  for (int n = 0; n <= n_max; ++n) p[n] = std::pow(l2, n);
  return normalized(std::move(p));
}

DensityMatrix heralded_state(const OpoParams& params, const ConditioningPath& path, double eta_opo, double eta_tot,
                             int n_max) {
  params.validate();
  path.validate();
  require(is_fraction(eta_opo) && is_fraction(eta_tot), "eta_opo and eta_tot must lie in [0, 1]");
  const double lambda = params.pair_amplitude();
  const std::vector<double> heralded = conditional_distribution(lambda, path.eta_c(), n_max);
  const std::vector<double> thermal = unconditional_distribution(lambda, n_max);

  // False heralds from dark counts carry the unconditioned signal.
  double false_fraction = 0.0;
  if (path.herald_rate > 0.0) {
    const double ratio = path.dark_rate / path.herald_rate;
    false_fraction = ratio / (1.0 + ratio);
  } else if (path.dark_rate > 0.0) {
    false_fraction = 1.0;
  }

  std::vector<double> mix(n_max + 1);
  for (int n = 0; n <= n_max; ++n) mix[n] = (1.0 - false_fraction) * heralded[n] + false_fraction * thermal[n];
  const DensityMatrix lossless = DensityMatrix::from_diagonal(normalized(std::move(mix)), n_max);
  return apply_loss(lossless, eta_opo * eta_tot);
}

double two_photon_fraction(double pump_ratio, double eta_c, double pair_exponent) {
  require(pump_ratio >= 0.0 && pump_ratio < 1.0, "pump_ratio must lie in [0, 1)");
  require(is_fraction(eta_c), "eta_c must lie in [0, 1]");
  if (pump_ratio == 0.0) return 0.0;
  // Closed form of p_2 / sum_{n>=1} p_n for p_n ~ a^n - b^n,
  // a = lambda^2, b = lambda^2 (1 - eta_c).
  const double a = std::pow(pump_ratio, 2.0 * pair_exponent);
  const double b = a * (1.0 - eta_c);
  return (a + b) * (1.0 - a) * (1.0 - b);
}

double fp_transmission(const FilterSpec& spec, double detuning) {
  spec.validate();
  const double coeff = 2.0 * spec.finesse() / std::numbers::pi;
  const double s = std::sin(std::numbers::pi * detuning / spec.fp_fsr);
  return 1.0 / (1.0 + coeff * coeff * s * s);
}

double if_transmission(const FilterSpec& spec, double detuning) {
  spec.validate();
  const double u = 2.0 * detuning / spec.if_bandwidth;
  return 1.0 / (1.0 + u * u);
}

double cascade_transmission(const FilterSpec& spec, double detuning) {
  return if_transmission(spec, detuning) * fp_transmission(spec, detuning);
}

double cascade_rejection(const FilterSpec& spec, const OpoParams& params, int p_max) {
  require(p_max >= 1, "p_max must be at least 1");
  require(params.delta_fsr > 0.0, "opo.delta_fsr must be positive");
  const double wanted = cascade_transmission(spec, 0.0);
  double unwanted = 0.0;
  for (int p = 1; p <= p_max; ++p) {
    const double det = p * params.delta_fsr;
    unwanted += cascade_transmission(spec, det) + cascade_transmission(spec, -det);
  }
  return unwanted / wanted;
}

HeraldingStats heralding_stats(const ConditioningPath& path, double bandwidth_hz) {
  path.validate();
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(path.eta_c() > 0.0, "conditioning path has zero efficiency");
  return HeraldingStats{path.herald_rate / (bandwidth_hz / 1e6), path.herald_rate / path.eta_c()};
}

}  // namespace herald
