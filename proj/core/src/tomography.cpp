#include "herald/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace herald {
namespace {

// Reductions run over fixed-size column blocks combined in block order, so
// results do not depend on the number of threads.
constexpr Eigen::Index kBlock = 2048;
constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct ProjectorSet {
  ComplexMatrix vectors;                    // column j: <n|x_j, theta_j> = e^{i n theta} psi_n(x)
  Eigen::VectorXd counts;                   // samples per column
  std::vector<std::size_t> representative;  // a sample index for each column
  std::vector<std::size_t> column_of;       // column for each sample
};

void fill_projector(double x, double theta, std::vector<double>& psi, ComplexMatrix& out, Eigen::Index col) {
  fock_wavefunctions(x, psi);
  for (std::size_t n = 0; n < psi.size(); ++n) {
    out(static_cast<Eigen::Index>(n), col) = std::polar(psi[n], static_cast<double>(n) * theta);
  }
}

struct Axis {
  double lo;
  double width;
  int bins;
  int index(double v) const { return std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1); }
  double center(int i) const { return lo + (i + 0.5) * width; }
};

Axis x_axis(std::span<const QuadratureSample> samples, int bins) {
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end(),
                                            [](const auto& a, const auto& b) { return a.x < b.x; });
  double lo = lo_it->x;
  double hi = hi_it->x;
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return Axis{lo, (hi - lo) / bins, bins};
}

ProjectorSet build_projectors(std::span<const QuadratureSample> samples, int n_max,
                              const std::optional<ProjectorBinning>& binning) {
  const int d = n_max + 1;
  ProjectorSet set;
  std::vector<double> psi(d);
  set.column_of.resize(samples.size());
  if (!binning) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    set.vectors.resize(d, n);
    set.counts = Eigen::VectorXd::Ones(n);
    set.representative.resize(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
      fill_projector(samples[j].x, samples[j].theta, psi, set.vectors, static_cast<Eigen::Index>(j));
      set.representative[j] = j;
      set.column_of[j] = j;
    }
    return set;
  }

  const Axis xs = x_axis(samples, binning->x_bins);
  const Axis ts{0.0, std::numbers::pi / binning->theta_bins, binning->theta_bins};
  std::vector<std::size_t> cell_column(static_cast<std::size_t>(xs.bins) * ts.bins, kNoIndex);
  std::vector<std::pair<int, int>> cells;
  std::vector<double> counts;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const int ix = xs.index(samples[j].x);
    const int it = ts.index(samples[j].theta);
    std::size_t& col = cell_column[static_cast<std::size_t>(ix) * ts.bins + it];
    if (col == kNoIndex) {
      col = cells.size();
      cells.emplace_back(ix, it);
      counts.push_back(0.0);
      set.representative.push_back(j);
    }
    counts[col] += 1.0;
    set.column_of[j] = col;
  }
  set.vectors.resize(d, static_cast<Eigen::Index>(cells.size()));
  set.counts = Eigen::Map<Eigen::VectorXd>(counts.data(), static_cast<Eigen::Index>(counts.size()));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    fill_projector(xs.center(cells[c].first), ts.center(cells[c].second), psi, set.vectors,
                   static_cast<Eigen::Index>(c));
  }
  return set;
}

struct Evaluation {
  double loglik = 0.0;
  ComplexMatrix r;  // likelihood operator, normalized by the total weight
};

Evaluation evaluate(const ComplexMatrix& rho, const ProjectorSet& set, const Eigen::VectorXd& weights) {
  const Eigen::Index d = set.vectors.rows();
  const Eigen::Index n = set.vectors.cols();
  const Eigen::Index n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<ComplexMatrix> partial_r(static_cast<std::size_t>(n_blocks));
  std::vector<Neumaier> partial_ll(static_cast<std::size_t>(n_blocks));
  std::vector<std::size_t> bad(static_cast<std::size_t>(n_blocks), kNoIndex);

#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    const Eigen::Index start = b * kBlock;
    const Eigen::Index len = std::min(kBlock, n - start);
    const auto v = set.vectors.middleCols(start, len);
    const ComplexMatrix rv = rho * v;
    const Eigen::VectorXd p = v.conjugate().cwiseProduct(rv).colwise().sum().real().transpose();
    Eigen::VectorXd coeff(len);
    Neumaier& ll = partial_ll[static_cast<std::size_t>(b)];
    for (Eigen::Index j = 0; j < len; ++j) {
      const double w = weights[start + j];
      coeff[j] = 0.0;
      if (w == 0.0) continue;
      if (!(p[j] > 0.0) || !std::isfinite(p[j])) {
        if (bad[static_cast<std::size_t>(b)] == kNoIndex) bad[static_cast<std::size_t>(b)] = static_cast<std::size_t>(start + j);
        continue;
      }
      ll.add(w * std::log(p[j]));
      coeff[j] = w / p[j];
    }
    partial_r[static_cast<std::size_t>(b)] = v * coeff.asDiagonal() * v.adjoint();
  }

  for (std::size_t b = 0; b < bad.size(); ++b) {
    if (bad[b] != kNoIndex) {
      const std::size_t sample = set.representative[bad[b]];
      throw TomographyError("Tr(rho Pi) underflows for sample " + std::to_string(sample) +
                                "; the quadrature lies outside the range the truncated basis can represent",
                            sample);
    }
  }

  Evaluation out;
  Neumaier ll;
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  ComplexMatrix comp = ComplexMatrix::Zero(d, d);
  for (std::size_t b = 0; b < partial_r.size(); ++b) {
    ll.add(partial_ll[b].value());
    // Kahan summation across blocks, entry by entry
    const ComplexMatrix y = partial_r[b] - comp;
    const ComplexMatrix t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  out.loglik = ll.value();
  out.r = sum / weights.sum();
  return out;
}

ComplexMatrix trace_normalized(ComplexMatrix m) {
  m = 0.5 * (m + m.adjoint()).eval();
  return m / m.trace().real();
}

ReconstructionResult run_maxlik(const ProjectorSet& set, const Eigen::VectorXd& weights,
                                const TomographySettings& settings) {
  const Eigen::Index d = set.vectors.rows();
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  ComplexMatrix rho = identity / static_cast<double>(d);
  Evaluation ev = evaluate(rho, set, weights);

  std::vector<double> history{ev.loglik};
  int iterations = 0;
  bool converged = false;
  while (iterations < settings.max_iters) {
    ComplexMatrix candidate = trace_normalized(ev.r * rho * ev.r);
    Evaluation next = evaluate(candidate, set, weights);
    if (next.loglik < ev.loglik) {
      // Diluted iteration: monotone for small enough eps.
      bool accepted = false;
      double eps = 1.0;
      for (int attempt = 0; attempt < 40 && !accepted; ++attempt, eps *= 0.5) {
        const ComplexMatrix step = (identity + eps * ev.r) / (1.0 + eps);
        candidate = trace_normalized(step * rho * step);
        next = evaluate(candidate, set, weights);
        accepted = next.loglik >= ev.loglik;
      }
      if (!accepted) {
        converged = true;  // no ascent direction left at double precision
        break;
      }
    }
    const double rel = (next.loglik - ev.loglik) / std::max(std::abs(ev.loglik), 1e-300);
    rho = std::move(candidate);
    ev = std::move(next);
    history.push_back(ev.loglik);
    ++iterations;
    if (rel < settings.loglik_rel_tol) {
      converged = true;
      break;
    }
  }

  const double residual = (ev.r * rho - rho).norm();
  return ReconstructionResult{DensityMatrix::from_matrix(std::move(rho)), std::move(history), iterations, converged,
                              residual, {}};
}

void check_samples(std::span<const QuadratureSample> samples) {
  if (samples.empty()) throw std::invalid_argument("tomography needs at least one quadrature sample");
}

}  // namespace

void TomographySettings::validate() const {
  if (n_max < 0) throw std::invalid_argument("tomography n_max must be non-negative");
  if (max_iters < 1) throw std::invalid_argument("tomography max_iters must be at least 1");
  if (!(loglik_rel_tol > 0.0)) throw std::invalid_argument("tomography tolerance must be positive");
  if (binning && (binning->x_bins < 1 || binning->theta_bins < 1)) {
    throw std::invalid_argument("projector binning needs positive bin counts");
  }
}

ReconstructionResult maxlik_reconstruct(std::span<const QuadratureSample> samples, const TomographySettings& settings) {
  settings.validate();
  check_samples(samples);
  const ProjectorSet set = build_projectors(samples, settings.n_max, settings.binning);
  return run_maxlik(set, set.counts, settings);
}

double loglikelihood(const DensityMatrix& rho, std::span<const QuadratureSample> samples) {
  check_samples(samples);
  const ProjectorSet set = build_projectors(samples, rho.n_max(), std::nullopt);
  return evaluate(rho.matrix(), set, set.counts).loglik;
}

ComplexMatrix likelihood_operator(const DensityMatrix& rho, std::span<const QuadratureSample> samples) {
  check_samples(samples);
  const ProjectorSet set = build_projectors(samples, rho.n_max(), std::nullopt);
  return evaluate(rho.matrix(), set, set.counts).r;
}

DiagonalReconstruction reconstruct_diagonal(std::span<const QuadratureSample> samples,
                                            const TomographySettings& settings) {
  settings.validate();
  check_samples(samples);
  const int d = settings.n_max + 1;

  // a(j, n) = psi_n(x_j)^2
  std::vector<double> xs;
  std::vector<double> counts;
  std::vector<std::size_t> representative;
  if (settings.binning) {
    const Axis axis = x_axis(samples, settings.binning->x_bins);
    counts.assign(static_cast<std::size_t>(axis.bins), 0.0);
    representative.assign(static_cast<std::size_t>(axis.bins), kNoIndex);
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const auto i = static_cast<std::size_t>(axis.index(samples[j].x));
      counts[i] += 1.0;
      if (representative[i] == kNoIndex) representative[i] = j;
    }
    std::vector<double> kept_counts;
    std::vector<std::size_t> kept_rep;
    for (int i = 0; i < axis.bins; ++i) {
      if (counts[static_cast<std::size_t>(i)] == 0.0) continue;
      xs.push_back(axis.center(i));
      kept_counts.push_back(counts[static_cast<std::size_t>(i)]);
      kept_rep.push_back(representative[static_cast<std::size_t>(i)]);
    }
    counts = std::move(kept_counts);
    representative = std::move(kept_rep);
  } else {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      xs.push_back(samples[j].x);
      representative.push_back(j);
    }
    counts.assign(samples.size(), 1.0);
  }

  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd a(n, d);
  std::vector<double> psi(d);
  for (Eigen::Index j = 0; j < n; ++j) {
    fock_wavefunctions(xs[static_cast<std::size_t>(j)], psi);
    for (int k = 0; k < d; ++k) a(j, k) = psi[k] * psi[k];
  }
  const Eigen::Map<const Eigen::VectorXd> w(counts.data(), n);
  const double total = w.sum();

  Eigen::VectorXd p = Eigen::VectorXd::Constant(d, 1.0 / d);
  auto loglik = [&](const Eigen::VectorXd& q) {
    Neumaier acc;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(q[j] > 0.0) || !std::isfinite(q[j])) {
        const std::size_t sample = representative[static_cast<std::size_t>(j)];
        throw TomographyError("photon-number likelihood underflows for sample " + std::to_string(sample), sample);
      }
      acc.add(w[j] * std::log(q[j]));
    }
    return acc.value();
  };

  Eigen::VectorXd q = a * p;
  DiagonalReconstruction out;
  out.loglik_history.push_back(loglik(q));
  while (out.iterations_used < settings.max_iters) {
    const Eigen::VectorXd ratio = w.cwiseQuotient(q);
    p = p.cwiseProduct(a.transpose() * ratio) / total;
    p /= p.sum();
    q = a * p;
    const double ll = loglik(q);
    const double prev = out.loglik_history.back();
    out.loglik_history.push_back(ll);
    ++out.iterations_used;
    if ((ll - prev) / std::max(std::abs(prev), 1e-300) < settings.loglik_rel_tol) {
      out.converged = true;
      break;
    }
  }
  out.probabilities.assign(p.data(), p.data() + p.size());
  return out;
}

BootstrapResult bootstrap_errors(std::span<const QuadratureSample> samples, const TomographySettings& settings,
                                 int n_resamples) {
  settings.validate();
  check_samples(samples);
  if (n_resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");

  BootstrapResult out;
  out.n_resamples = n_resamples;
  if (n_resamples < 20) {
    out.warnings.push_back("only " + std::to_string(n_resamples) +
                           " resamples; at least 20 are needed for a usable spread estimate");
  }

  const ProjectorSet set = build_projectors(samples, settings.n_max, settings.binning);
  const int d = settings.n_max + 1;
  std::mt19937_64 rng(settings.seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);

  std::vector<std::vector<double>> draws;
  draws.reserve(static_cast<std::size_t>(n_resamples));
  for (int r = 0; r < n_resamples; ++r) {
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(set.counts.size());
    for (std::size_t k = 0; k < samples.size(); ++k) weights[static_cast<Eigen::Index>(set.column_of[pick(rng)])] += 1.0;
    draws.push_back(run_maxlik(set, weights, settings).rho.diagonal());
  }

  out.mean.assign(d, 0.0);
  out.std_errors.assign(d, 0.0);
  for (int n = 0; n < d; ++n) {
    Neumaier mean;
    for (const auto& draw : draws) mean.add(draw[n]);
    out.mean[n] = mean.value() / n_resamples;
    if (n_resamples < 2) continue;
    Neumaier var;
    for (const auto& draw : draws) var.add((draw[n] - out.mean[n]) * (draw[n] - out.mean[n]));
    out.std_errors[n] = std::sqrt(var.value() / (n_resamples - 1));
  }
  if (n_resamples < 2) {
    out.warnings.push_back("zero variance: a single resample cannot estimate the spread; errors reported as 0");
  }
  return out;
}

}  // namespace herald
