#pragma once

// Source and apparatus model: a type-II OPO pumped below threshold, a lossy
// heralding path, detection-efficiency budgets and the spectral filter
// cascade on the heralding arm.

#include <string>

#include "herald/fock.hpp"

namespace herald {

struct OpoParams {
  double t_out = 0.10;        // output-coupler transmission
  double l_intra = 0.004;     // intracavity loss
  double gamma = 60e6;        // cavity bandwidth, Hz
  double delta_fsr = 4.3e9;   // free spectral range, Hz
  double pump_ratio = 1.0 / 80.0;
  // Pair amplitude lambda = pump_ratio^pair_exponent.
  double pair_exponent = 0.5;

  void validate() const;
  double pair_amplitude() const;
};

struct EfficiencyBudget {
  double eta_noise = 0.96;
  double eta_phot = 0.97;
  double eta_prop = 0.95;
  double visibility = 0.98;

  void validate() const;
  double eta_vis() const { return visibility * visibility; }
};

struct ConditioningPath {
  double eta_det = 0.07;
  double transmission = 0.40;
  double dark_rate = 1.0;       // Hz
  double herald_rate = 30e3;    // Hz

  void validate() const;
  double eta_c() const { return eta_det * transmission; }
};

struct FilterSpec {
  double if_bandwidth = 132.4e9;  // interferential filter FWHM, Hz
  double fp_fsr = 330e9;
  double fp_bandwidth = 320e6;

  void validate() const;
  double finesse() const { return fp_fsr / fp_bandwidth; }
};

/// FWHM in Hz of a filter specified by its wavelength width.
double wavelength_width_to_frequency(double width_m, double center_wavelength_m);

/// T / (T + L).
double escape_efficiency(double t_out, double l_intra);

/// eta_noise * eta_phot * visibility^2 * eta_prop.
double total_detection_efficiency(const EfficiencyBudget& budget);

/// 1 - eta_tot * eta_opo, ignoring multi-photon terms.
double expected_vacuum(double eta_tot, double eta_opo);

/// Photon-number distribution of the heralded signal before any loss, for
/// pair amplitude lambda and heralding efficiency eta_c:
/// p_n ~ lambda^(2n) [1 - (1 - eta_c)^n], truncated at n_max.
std::vector<double> conditional_distribution(double lambda, double eta_c, int n_max);

/// Unconditioned signal: p_n ~ lambda^(2n), truncated at n_max.
std::vector<double> unconditional_distribution(double lambda, int n_max);

/// Heralded signal state after dark-count admixture and loss
/// eta_opo * eta_tot. Photon-number diagonal.
DensityMatrix heralded_state(const OpoParams& params, const ConditioningPath& path, double eta_opo, double eta_tot,
                             int n_max = kDefaultNMax);

/// rho_22 / sum_{n>=1} rho_nn of the lossless conditional state.
double two_photon_fraction(double pump_ratio, double eta_c, double pair_exponent = 0.5);

/// Airy transmission of the filtering cavity at a given detuning.
double fp_transmission(const FilterSpec& spec, double detuning);

/// Lorentzian transmission of the interferential filter.
double if_transmission(const FilterSpec& spec, double detuning);

/// Combined transmission of both filter stages.
double cascade_transmission(const FilterSpec& spec, double detuning);

/// Heralds caused by comb modes p = +-1..+-p_max (detuning p * delta_fsr)
/// relative to the wanted p = 0 mode, each mode equally bright.
double cascade_rejection(const FilterSpec& spec, const OpoParams& params, int p_max = 100);

struct HeraldingStats {
  double brightness;      // heralds / s / MHz
  double corrected_rate;  // heralds / s with conditioning-path losses removed
};

HeraldingStats heralding_stats(const ConditioningPath& path, double bandwidth_hz);

}  // namespace herald
