#include "herald/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace herald {

QuadratureCdf::QuadratureCdf(double x_lo, double dx, std::vector<double> cdf)
    : x_lo_(x_lo), dx_(dx), cdf_(std::move(cdf)) {
  if (cdf_.size() < 2 || !(cdf_.back() > 0.0)) throw std::invalid_argument("degenerate quadrature CDF");
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
}

double QuadratureCdf::quantile(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return x_lo_;
  if (it == cdf_.end()) return x_lo_ + dx_ * static_cast<double>(cdf_.size() - 1);
  const auto j = static_cast<std::size_t>(it - cdf_.begin());
  const double frac = (u - cdf_[j - 1]) / (cdf_[j] - cdf_[j - 1]);
  return x_lo_ + dx_ * (static_cast<double>(j - 1) + frac);
}

double QuadratureCdf::cdf(double x) const {
  const double pos = (x - x_lo_) / dx_;
  if (pos <= 0.0) return 0.0;
  const auto last = static_cast<double>(cdf_.size() - 1);
  if (pos >= last) return 1.0;
  const auto j = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j);
  return cdf_[j] + frac * (cdf_[j + 1] - cdf_[j]);
}

QuadratureSampler::QuadratureSampler(const DensityMatrix& rho, std::size_t grid_intervals) {
  if (grid_intervals < 16) throw std::invalid_argument("sampler grid too coarse");
  const int d = rho.dim();
  // Fock states up to n_max live inside |x| < sqrt(2 n_max + 1); the margin
  // leaves tails below 1e-25.
  const double half_width = std::sqrt(2.0 * rho.n_max() + 1.0) + 8.0;
  x_lo_ = -half_width;
  dx_ = 2.0 * half_width / static_cast<double>(grid_intervals);
  phase_independent_ = rho.is_diagonal();

  const ComplexMatrix& m = rho.matrix();
  harmonics_ = ComplexMatrix::Zero(static_cast<Eigen::Index>(grid_intervals + 1), d);
  std::vector<double> psi(d);
  for (std::size_t i = 0; i <= grid_intervals; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    fock_wavefunctions(x_lo_ + dx_ * static_cast<double>(i), psi);
    for (int k = 0; k < d; ++k) harmonics_(row, 0) += m(k, k).real() * psi[k] * psi[k];
    for (int off = 1; off < d; ++off) {
      Complex acc = 0.0;
      for (int k = 0; k + off < d; ++k) acc += m(k, k + off) * (psi[k] * psi[k + off]);
      harmonics_(row, off) = 2.0 * acc;
    }
  }
  if (phase_independent_) fixed_.push_back(table(0.0));
}

QuadratureCdf QuadratureSampler::table(double theta) const {
  const Eigen::Index n = harmonics_.rows();
  const Eigen::Index d = harmonics_.cols();
  Eigen::VectorXcd phases(d);
  for (Eigen::Index k = 0; k < d; ++k) phases[k] = std::polar(1.0, static_cast<double>(k) * theta);
  const Eigen::VectorXd pdf = (harmonics_ * phases).real().cwiseMax(0.0);
  std::vector<double> cdf(static_cast<std::size_t>(n));
  cdf[0] = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    cdf[static_cast<std::size_t>(i)] = cdf[static_cast<std::size_t>(i - 1)] + 0.5 * dx_ * (pdf[i - 1] + pdf[i]);
  }
  return QuadratureCdf(x_lo_, dx_, std::move(cdf));
}

double QuadratureSampler::sample(double theta, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  if (phase_independent_) return fixed_.front().quantile(u);
  return table(theta).quantile(u);
}

double sample_quadrature(const DensityMatrix& rho, double theta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return QuadratureSampler(rho).sample(theta, rng);
}

}  // namespace herald
