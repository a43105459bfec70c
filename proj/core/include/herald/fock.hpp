#pragma once

// Truncated Fock-basis state algebra.
//
// Quadrature convention throughout the library: [x, p] = i, so the vacuum has
// quadrature variance 1/2 and psi_0(x) = pi^(-1/4) exp(-x^2 / 2). Data recorded
// in shot-noise units with vacuum variance 1 must be scaled by 1/sqrt(2).

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace herald {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr int kDefaultNMax = 10;

enum class Validation {
  full,
  // Hermiticity and unit trace only. Used for raw loss-inverted matrices.
  skip_psd,
};

/// Density matrix on the basis {|0>, ..., |n_max>}.
///
/// Instances are immutable and always satisfy the Hermitian and unit-trace
/// invariants; positivity is checked unless constructed with
/// Validation::skip_psd.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(ComplexMatrix m, Validation check = Validation::full);
  static DensityMatrix vacuum(int n_max = kDefaultNMax);
  static DensityMatrix fock(int n, int n_max = kDefaultNMax);
  // Photon-number-diagonal state; probs beyond probs.size() are zero.
  static DensityMatrix from_diagonal(std::span<const double> probs, int n_max = kDefaultNMax);
  static DensityMatrix maximally_mixed(int n_max = kDefaultNMax);

  int n_max() const { return static_cast<int>(m_.rows()) - 1; }
  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(int m, int n) const { return m_(m, n); }

  double population(int n) const;
  std::vector<double> diagonal() const;
  double min_eigenvalue() const;
  bool is_diagonal(double tol = 1e-14) const;

  // Re-expresses the state on a different truncation. Growing pads with zeros;
  // shrinking drops the upper block and renormalizes.
  DensityMatrix resized(int n_max) const;

 private:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// One homodyne outcome: quadrature x measured at local-oscillator phase
/// theta. Stored with theta in [0, pi); (x, theta + pi) is the same outcome
/// as (-x, theta).
struct QuadratureSample {
  double x = 0.0;
  double theta = 0.0;

  static QuadratureSample reduced(double x, double theta);
};

// --- wavefunctions and quadrature statistics -------------------------------

/// Harmonic-oscillator eigenfunction psi_n(x), evaluated by the stable
/// three-term recurrence.
double fock_wavefunction(int n, double x);

/// Fills out[k] = psi_k(x) for k = 0..out.size()-1.
void fock_wavefunctions(double x, std::span<double> out);

/// p(x | theta) = sum_{m,n} rho_mn e^{i(n-m)theta} psi_m(x) psi_n(x).
double quadrature_pdf(const DensityMatrix& rho, double theta, double x);

// --- phase space ------------------------------------------------------------

/// Wigner function W(x, p). |W| <= 1/pi for every state.
double wigner(const DensityMatrix& rho, double x, double p);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  Eigen::MatrixXd values;  // values(i, j) = W(x_axis[i], p_axis[j])

  double cell_area() const;
  double integral() const;
};

WignerGrid wigner_grid(const DensityMatrix& rho, Range x_range, Range p_range, int resolution);

// --- loss channel -----------------------------------------------------------

/// Bernoulli photon loss: each photon survives independently with
/// probability eta.
DensityMatrix apply_loss(const DensityMatrix& rho, double eta);

enum class InversionStatus { physical, non_physical };

struct LossInversion {
  DensityMatrix rho;       // raw inverse, never projected onto the PSD cone
  InversionStatus status;  // non_physical when min eigenvalue < -kPsdTol
  double min_eigenvalue;
  double psd_distance;     // sum of |negative eigenvalues|
};

/// Exact inverse of apply_loss at fixed truncation, by back-substitution
/// along each diagonal of the matrix.
LossInversion invert_loss(const DensityMatrix& rho, double eta);

/// First n_keep+1 diagonal entries, renormalized to sum to one.
std::vector<double> renormalized_diagonal(const DensityMatrix& rho, int n_keep);

/// <n|rho|n>.
double fidelity_with_fock(const DensityMatrix& rho, int n);

// --- serialization ----------------------------------------------------------

// {"n_max": N, "re": [[...]], "im": [[...]]}
std::string to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(std::string_view text, Validation check = Validation::full);

// Header row holds p values (first cell "x\p"); first column holds x values.
void write_wigner_csv(std::ostream& out, const WignerGrid& grid);

}  // namespace herald
