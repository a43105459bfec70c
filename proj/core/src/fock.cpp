#include "herald/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace herald {
namespace {

void check_n_max(int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be non-negative, got " + std::to_string(n_max));
}

// Pascal triangle up to row n; exact in double for the truncations we use.
std::vector<std::vector<double>> binomial_table(int n) {
  std::vector<std::vector<double>> c(n + 1);
  for (int i = 0; i <= n; ++i) {
    c[i].assign(i + 1, 1.0);
    for (int k = 1; k < i; ++k) c[i][k] = c[i - 1][k - 1] + c[i - 1][k];
  }
  return c;
}

// Coefficient of rho_{m+k, n+k} in the lossy element rho'_{m,n}.
struct LossKernel {
  LossKernel(int n_max, double eta) : eta(eta), binom(binomial_table(n_max)) {
    sqrt_eta_pow.resize(2 * n_max + 1);
    loss_pow.resize(n_max + 1);
    for (int i = 0; i <= 2 * n_max; ++i) sqrt_eta_pow[i] = std::pow(eta, 0.5 * i);
    for (int k = 0; k <= n_max; ++k) loss_pow[k] = std::pow(1.0 - eta, k);
  }

  double operator()(int m, int n, int k) const {
    return std::sqrt(binom[m + k][m] * binom[n + k][n]) * sqrt_eta_pow[m + n] * loss_pow[k];
  }

  double eta;
  std::vector<std::vector<double>> binom;
  std::vector<double> sqrt_eta_pow;
  std::vector<double> loss_pow;
};

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("efficiency must lie in [0, 1], got " + std::to_string(eta));
  }
}

}  // namespace

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix m, Validation check) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
  if (!m.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  const double herm_err = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_err > kHermitianTol) {
    throw std::invalid_argument("density matrix is not Hermitian (max deviation " + std::to_string(herm_err) + ")");
  }
  ComplexMatrix sym = 0.5 * (m + m.adjoint());
  const double trace = sym.trace().real();
  if (std::abs(trace - 1.0) > kTraceTol) {
    throw std::invalid_argument("density matrix trace is " + std::to_string(trace) + ", expected 1");
  }
  DensityMatrix rho(std::move(sym));
  if (check == Validation::full) {
    const double lo = rho.min_eigenvalue();
    if (lo < -kPsdTol) {
      throw std::invalid_argument("density matrix is not positive semidefinite (min eigenvalue " +
                                  std::to_string(lo) + ")");
    }
  }
  return rho;
}

DensityMatrix DensityMatrix::vacuum(int n_max) { return fock(0, n_max); }

DensityMatrix DensityMatrix::fock(int n, int n_max) {
  check_n_max(n_max);
  if (n < 0 || n > n_max) {
    throw std::invalid_argument("Fock index " + std::to_string(n) + " outside basis 0.." + std::to_string(n_max));
  }
  ComplexMatrix m = ComplexMatrix::Zero(n_max + 1, n_max + 1);
  m(n, n) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::from_diagonal(std::span<const double> probs, int n_max) {
  check_n_max(n_max);
  if (probs.size() > static_cast<std::size_t>(n_max) + 1) {
    throw std::invalid_argument("diagonal has " + std::to_string(probs.size()) + " entries but n_max is " +
                                std::to_string(n_max));
  }
  ComplexMatrix m = ComplexMatrix::Zero(n_max + 1, n_max + 1);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= -kPsdTol)) throw std::invalid_argument("negative photon-number probability");
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = probs[i];
  }
  return from_matrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int n_max) {
  check_n_max(n_max);
  const int d = n_max + 1;
  return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(d));
}

double DensityMatrix::population(int n) const {
  if (n < 0 || n > n_max()) {
    throw std::invalid_argument("photon number " + std::to_string(n) + " outside basis 0.." + std::to_string(n_max()));
  }
  return m_(n, n).real();
}

std::vector<double> DensityMatrix::diagonal() const {
  std::vector<double> d(dim());
  for (int i = 0; i < dim(); ++i) d[i] = m_(i, i).real();
  return d;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool DensityMatrix::is_diagonal(double tol) const {
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (i != j && std::abs(m_(i, j)) > tol) return false;
  return true;
}

DensityMatrix DensityMatrix::resized(int new_n_max) const {
  check_n_max(new_n_max);
  const int d = new_n_max + 1;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  const int keep = std::min(d, dim());
  m.topLeftCorner(keep, keep) = m_.topLeftCorner(keep, keep);
  const double trace = m.trace().real();
  if (trace <= 0.0) throw std::invalid_argument("truncation removes all weight from the state");
  m /= trace;
  return DensityMatrix(std::move(m));
}

QuadratureSample QuadratureSample::reduced(double x, double theta) {
  if (!std::isfinite(x) || !std::isfinite(theta)) throw std::invalid_argument("quadrature sample must be finite");
  double t = std::fmod(theta, 2.0 * std::numbers::pi);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  if (t >= std::numbers::pi) {
    t -= std::numbers::pi;
    x = -x;
  }
  // fmod can land exactly on pi after the shift for inputs just below 2 pi
  if (t >= std::numbers::pi) t = 0.0;
  return QuadratureSample{x, t};
}

double fock_wavefunction(int n, double x) {
  if (n < 0) throw std::invalid_argument("photon number must be non-negative, got " + std::to_string(n));
  std::vector<double> psi(static_cast<std::size_t>(n) + 1);
  fock_wavefunctions(x, psi);
  return psi.back();
}

void fock_wavefunctions(double x, std::span<double> out) {
  if (out.empty()) return;
  // pi^(-1/4)
  static const double kNorm = std::pow(std::numbers::pi, -0.25);
  out[0] = kNorm * std::exp(-0.5 * x * x);
  if (out.size() == 1) return;
  out[1] = std::numbers::sqrt2 * x * out[0];
  for (std::size_t n = 2; n < out.size(); ++n) {
    const double dn = static_cast<double>(n);
    out[n] = std::sqrt(2.0 / dn) * x * out[n - 1] - std::sqrt((dn - 1.0) / dn) * out[n - 2];
  }
}

double quadrature_pdf(const DensityMatrix& rho, double theta, double x) {
  const int d = rho.dim();
  std::vector<double> psi(d);
  fock_wavefunctions(x, psi);
  const ComplexMatrix& m = rho.matrix();
  double p = 0.0;
  for (int k = 0; k < d; ++k) p += m(k, k).real() * psi[k] * psi[k];
  for (int off = 1; off < d; ++off) {
    const Complex phase = std::polar(1.0, off * theta);
    double acc = 0.0;
    for (int k = 0; k + off < d; ++k) acc += (m(k, k + off) * phase).real() * psi[k] * psi[k + off];
    p += 2.0 * acc;
  }
  return p;
}

double wigner(const DensityMatrix& rho, double x, double p) {
  const int d = rho.dim();
  const ComplexMatrix& m = rho.matrix();
  const double r2 = x * x + p * p;
  const double u = 2.0 * r2;
  const double phi = std::atan2(p, x);
  double w = 0.0;
  for (int n = 0; n < d; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    w += m(n, n).real() * sign * std::exp(-r2) * std::assoc_laguerre(n, 0, u);
    if (r2 == 0.0) continue;
    // Kernel of |m><n| for m > n:
    // (-1)^n/pi sqrt(n!/m!) (sqrt2 (x - ip))^(m-n) e^{-r^2} L_n^{(m-n)}(2 r^2)
    for (int k = n + 1; k < d; ++k) {
      const int diff = k - n;
      const double log_mag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0)) +
                             diff * std::log(std::numbers::sqrt2 * std::sqrt(r2)) - r2;
      const double mag = sign * std::exp(log_mag) * std::assoc_laguerre(n, diff, u);
      const Complex kernel = std::polar(mag, -diff * phi);
      w += 2.0 * (m(k, n) * kernel).real();
    }
  }
  return w / std::numbers::pi;
}

double WignerGrid::cell_area() const {
  if (x_axis.size() < 2 || p_axis.size() < 2) return 0.0;
  return (x_axis[1] - x_axis[0]) * (p_axis[1] - p_axis[0]);
}

double WignerGrid::integral() const { return values.sum() * cell_area(); }

WignerGrid wigner_grid(const DensityMatrix& rho, Range x_range, Range p_range, int resolution) {
  if (!(x_range.hi > x_range.lo) || !(p_range.hi > p_range.lo)) {
    throw std::invalid_argument("Wigner grid range is empty");
  }
  if (resolution < 2) throw std::invalid_argument("Wigner grid needs at least 2 points per axis");
  WignerGrid grid;
  auto axis = [resolution](Range r) {
    std::vector<double> a(resolution);
    const double step = (r.hi - r.lo) / (resolution - 1);
    for (int i = 0; i < resolution; ++i) a[i] = r.lo + step * i;
    return a;
  };
  grid.x_axis = axis(x_range);
  grid.p_axis = axis(p_range);
  grid.values.resize(resolution, resolution);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) grid.values(i, j) = wigner(rho, grid.x_axis[i], grid.p_axis[j]);
  return grid;
}

DensityMatrix apply_loss(const DensityMatrix& rho, double eta) {
  check_eta(eta);
  const int n_max = rho.n_max();
  const LossKernel kernel(n_max, eta);
  const ComplexMatrix& in = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
  for (int m = 0; m <= n_max; ++m) {
    for (int n = m; n <= n_max; ++n) {
      Complex acc = 0.0;
      for (int k = 0; n + k <= n_max; ++k) acc += kernel(m, n, k) * in(m + k, n + k);
      out(m, n) = acc;
      out(n, m) = std::conj(acc);
    }
  }
  // A lossy image of a non-physical matrix need not be physical either.
  const bool was_physical = rho.min_eigenvalue() >= -kPsdTol;
  return DensityMatrix::from_matrix(std::move(out), was_physical ? Validation::full : Validation::skip_psd);
}

LossInversion invert_loss(const DensityMatrix& rho, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("loss inversion needs efficiency in (0, 1], got " + std::to_string(eta));
  }
  const int n_max = rho.n_max();
  const LossKernel kernel(n_max, eta);
  const ComplexMatrix& lossy = rho.matrix();
  ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
  for (int off = 0; off <= n_max; ++off) {
    for (int m = n_max - off; m >= 0; --m) {
      const int n = m + off;
      Complex acc = lossy(m, n);
      for (int k = 1; n + k <= n_max; ++k) acc -= kernel(m, n, k) * out(m + k, n + k);
      out(m, n) = acc / kernel(m, n, 0);
      out(n, m) = std::conj(out(m, n));
    }
  }
  DensityMatrix raw = DensityMatrix::from_matrix(std::move(out), Validation::skip_psd);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(raw.matrix(), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  double negative = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] < 0.0) negative -= ev[i];
  const double lo = ev.minCoeff();
  return LossInversion{std::move(raw), lo < -kPsdTol ? InversionStatus::non_physical : InversionStatus::physical,
                       lo, negative};
}

std::vector<double> renormalized_diagonal(const DensityMatrix& rho, int n_keep) {
  if (n_keep < 0 || n_keep > rho.n_max()) throw std::invalid_argument("n_keep outside the basis");
  std::vector<double> d(rho.diagonal());
  d.resize(n_keep + 1);
  double total = 0.0;
  for (double v : d) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("no weight left after truncation");
  for (double& v : d) v /= total;
  return d;
}

double fidelity_with_fock(const DensityMatrix& rho, int n) { return rho.population(n); }

}  // namespace herald
