#pragma once

// Maximum-likelihood homodyne tomography on a truncated Fock basis.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "herald/fock.hpp"

namespace herald {

/// Groups samples into x/theta cells and uses one projector per occupied
/// cell, evaluated at the cell center.
struct ProjectorBinning {
  int x_bins = 200;
  int theta_bins = 12;
};

struct TomographySettings {
  int n_max = kDefaultNMax;
  int max_iters = 2000;
  double loglik_rel_tol = 1e-10;
  std::optional<ProjectorBinning> binning;  // per-sample projectors when empty
  std::uint64_t seed = 0;                   // bootstrap resampling

  void validate() const;
};

struct ReconstructionResult {
  DensityMatrix rho;
  std::vector<double> loglik_history;  // entry 0 is the starting state
  int iterations_used = 0;
  bool converged = false;
  double fixed_point_residual = 0.0;   // ||R(rho) rho - rho||_F at the end
  std::vector<double> diag_errors;     // filled by bootstrap callers, else empty
};

/// Raised when Tr(rho Pi_j) underflows or turns non-finite.
class TomographyError : public std::runtime_error {
 public:
  TomographyError(const std::string& what, std::size_t sample_index)
      : std::runtime_error(what), sample_index_(sample_index) {}
  std::size_t sample_index() const { return sample_index_; }

 private:
  std::size_t sample_index_;
};

/// Iterates rho <- N[R rho R] from the maximally mixed state with
/// R = (1/N) sum_j Pi_j / Tr(rho Pi_j). A step that would lower the
/// likelihood is retried with the diluted operator (1 + eps R) / (1 + eps),
/// so the recorded log-likelihood never decreases.
ReconstructionResult maxlik_reconstruct(std::span<const QuadratureSample> samples, const TomographySettings& settings);

/// sum_j log Tr(rho Pi_j).
double loglikelihood(const DensityMatrix& rho, std::span<const QuadratureSample> samples);

/// R(rho) for per-sample projectors.
ComplexMatrix likelihood_operator(const DensityMatrix& rho, std::span<const QuadratureSample> samples);

struct DiagonalReconstruction {
  std::vector<double> probabilities;
  std::vector<double> loglik_history;
  int iterations_used = 0;
  bool converged = false;
};

/// Expectation-maximization for p(x) = sum_n p_n psi_n(x)^2. Only valid for
/// phase-randomized data; theta is ignored. Binning, when set, uses x_bins.
DiagonalReconstruction reconstruct_diagonal(std::span<const QuadratureSample> samples,
                                            const TomographySettings& settings);

struct BootstrapResult {
  std::vector<double> std_errors;  // per photon number
  std::vector<double> mean;        // mean diagonal over resamples
  int n_resamples = 0;
  std::vector<std::string> warnings;
};

/// Plain nonparametric bootstrap: resample with replacement, rerun
/// maxlik_reconstruct, report the standard deviation of each rho_nn.
BootstrapResult bootstrap_errors(std::span<const QuadratureSample> samples, const TomographySettings& settings,
                                 int n_resamples);

}  // namespace herald
