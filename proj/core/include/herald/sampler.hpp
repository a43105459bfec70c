#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "herald/fock.hpp"

namespace herald {

/// Tabulated cumulative distribution of a quadrature at one phase.
class QuadratureCdf {
 public:
  QuadratureCdf(double x_lo, double dx, std::vector<double> cdf);

  /// Inverse CDF, u in [0, 1).
  double quantile(double u) const;
  double cdf(double x) const;

 private:
  double x_lo_;
  double dx_;
  std::vector<double> cdf_;  // normalized, cdf_.front() == 0, cdf_.back() == 1
};

/// Inverse-CDF sampler for p(x | theta) of a fixed state.
///
/// The phase dependence is precomputed as harmonics on an x grid, so building
/// the table for a new phase costs O(grid * n_max).
class QuadratureSampler {
 public:
  explicit QuadratureSampler(const DensityMatrix& rho, std::size_t grid_intervals = 4096);

  bool phase_independent() const { return phase_independent_; }
  QuadratureCdf table(double theta) const;
  double sample(double theta, std::mt19937_64& rng) const;

 private:
  double x_lo_;
  double dx_;
  bool phase_independent_;
  // harmonics_(i, d): coefficient of e^{i d theta} in p(x_i | theta)
  ComplexMatrix harmonics_;
  std::vector<QuadratureCdf> fixed_;  // single table when phase independent
};

double sample_quadrature(const DensityMatrix& rho, double theta, std::uint64_t seed);

}  // namespace herald
