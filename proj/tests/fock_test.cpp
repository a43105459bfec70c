#include "herald/fock.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace herald;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent route: closed-form Hermite polynomials from the standard library.
double hermite_oracle(int n, double x) {
  const double norm = 1.0 / std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(kPi));
  return norm * std::hermite(static_cast<unsigned>(n), x) * std::exp(-0.5 * x * x);
}

// W of |m><n| as (1/pi) int psi_m(x+y) psi_n(x-y) e^{-2ipy} dy.
std::complex<double> wigner_kernel_oracle(int m, int n, double x, double p) {
  auto re = [&](double y) { return fock_wavefunction(m, x + y) * fock_wavefunction(n, x - y) * std::cos(2 * p * y); };
  auto im = [&](double y) { return -fock_wavefunction(m, x + y) * fock_wavefunction(n, x - y) * std::sin(2 * p * y); };
  using boost::math::quadrature::gauss_kronrod;
  const double a = gauss_kronrod<double, 61>::integrate(re, -15.0, 15.0, 12, 1e-13);
  const double b = gauss_kronrod<double, 61>::integrate(im, -15.0, 15.0, 12, 1e-13);
  return {a / kPi, b / kPi};
}

double integrate_pdf(const DensityMatrix& rho, double theta) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double x) { return quadrature_pdf(rho, theta, x); },
                              -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

}  // namespace

TEST(DensityMatrix, RejectsInvalidMatrices) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 0.5;
  EXPECT_THROW(DensityMatrix::from_matrix(m), std::invalid_argument);  // trace 0.5
  m(1, 1) = 0.5;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix::from_matrix(m), std::invalid_argument);  // not Hermitian
  m(1, 0) = 0.1;
  EXPECT_NO_THROW(DensityMatrix::from_matrix(m));
  m(0, 1) = m(1, 0) = 0.9;
  EXPECT_THROW(DensityMatrix::from_matrix(m), std::invalid_argument);  // eigenvalue -0.4
  EXPECT_NO_THROW(DensityMatrix::from_matrix(m, Validation::skip_psd));
  EXPECT_THROW(DensityMatrix::fock(3, 2), std::invalid_argument);
}

TEST(DensityMatrix, RandomStatesSatisfyInvariants) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho = testing_util::random_state(rng, 6, 6);
    const ComplexMatrix& m = rho.matrix();
    EXPECT_LE((m - m.adjoint()).cwiseAbs().maxCoeff(), kHermitianTol);
    EXPECT_NEAR(m.trace().real(), 1.0, kTraceTol);
    EXPECT_GE(rho.min_eigenvalue(), -kPsdTol);
  }
}

TEST(FockWavefunction, GroundStatePeakAndParity) {
  EXPECT_NEAR(fock_wavefunction(0, 0.0), std::pow(kPi, -0.25), 1e-15);
  EXPECT_NEAR(fock_wavefunction(0, 0.0), 0.7511, 1e-4);
  EXPECT_EQ(fock_wavefunction(1, 0.0), 0.0);
  EXPECT_THROW(fock_wavefunction(-1, 0.0), std::invalid_argument);
}

TEST(FockWavefunction, RecurrenceMatchesHermiteOracle) {
  EXPECT_NEAR(fock_wavefunction(2, 1.0), hermite_oracle(2, 1.0), 1e-10);
  for (int n = 0; n <= 30; ++n) {
    for (double x : {-4.0, -1.3, 0.0, 0.7, 2.5, 5.0}) {
      EXPECT_NEAR(fock_wavefunction(n, x), hermite_oracle(n, x), 1e-10) << "n=" << n << " x=" << x;
    }
  }
}

TEST(FockWavefunction, OrthonormalOnTheLine) {
  using boost::math::quadrature::gauss_kronrod;
  for (int m = 0; m <= 6; ++m) {
    for (int n = m; n <= 6; ++n) {
      const double overlap = gauss_kronrod<double, 61>::integrate(
          [&](double x) { return fock_wavefunction(m, x) * fock_wavefunction(n, x); }, -12.0, 12.0, 10, 1e-14);
      EXPECT_NEAR(overlap, m == n ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(QuadraturePdf, VacuumAndSinglePhoton) {
  const DensityMatrix vac = DensityMatrix::vacuum(4);
  const DensityMatrix one = DensityMatrix::fock(1, 4);
  for (double theta : {0.0, 0.4, 2.0}) {
    EXPECT_NEAR(quadrature_pdf(vac, theta, 0.0), 1.0 / std::sqrt(kPi), 1e-15);
    EXPECT_NEAR(quadrature_pdf(one, theta, 0.0), 0.0, 1e-15);
    for (double x : {-2.0, -0.5, 0.3, 1.7}) {
      EXPECT_NEAR(quadrature_pdf(one, theta, x), 2 * x * x * std::exp(-x * x) / std::sqrt(kPi), 1e-14);
    }
  }
}

TEST(QuadraturePdf, MixtureHasShallowDip) {
  const std::vector<double> diag{0.18, 0.79, 0.03};
  const DensityMatrix rho = DensityMatrix::from_diagonal(diag, 10);
  // psi_1(0) = 0 and psi_2(0)^2 = 1 / (2 sqrt(pi))
  const double dip = (0.18 + 0.03 / 2) / std::sqrt(kPi);
  EXPECT_NEAR(quadrature_pdf(rho, 0.0, 0.0), dip, 1e-14);
  EXPECT_GT(quadrature_pdf(rho, 0.0, 0.0), 0.0);
  EXPECT_GT(quadrature_pdf(rho, 0.0, 1.0), quadrature_pdf(rho, 0.0, 0.0));
  EXPECT_GT(quadrature_pdf(rho, 0.0, -1.0), quadrature_pdf(rho, 0.0, 0.0));
}

TEST(QuadraturePdf, NormalizedRealAndNonNegativeForRandomStates) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 6; ++i) {
    const DensityMatrix rho = testing_util::random_state(rng, 8, 8);
    for (double theta : {0.0, 1.1, 2.9}) {
      EXPECT_NEAR(integrate_pdf(rho, theta), 1.0, 1e-6);
      for (double x = -6.0; x <= 6.0; x += 0.25) EXPECT_GE(quadrature_pdf(rho, theta, x), -1e-14);
    }
  }
}

TEST(QuadraturePdf, DiagonalStatesArePhaseIndependent) {
  const std::vector<double> diag{0.1, 0.3, 0.25, 0.2, 0.15};
  const DensityMatrix rho = DensityMatrix::from_diagonal(diag, 10);
  double worst = 0.0;
  for (double x = -5.0; x <= 5.0; x += 0.1) {
    const double ref = quadrature_pdf(rho, 0.0, x);
    for (double theta = 0.0; theta < kPi; theta += kPi / 37) {
      worst = std::max(worst, std::abs(quadrature_pdf(rho, theta, x) - ref));
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(QuadraturePdf, SecondMomentOfFockStates) {
  using boost::math::quadrature::gauss_kronrod;
  for (int n = 0; n <= 8; ++n) {
    const DensityMatrix rho = DensityMatrix::fock(n, 10);
    const double m2 = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return x * x * quadrature_pdf(rho, 0.3, x); }, -15.0, 15.0, 10, 1e-13);
    EXPECT_NEAR(m2, n + 0.5, 1e-6);
  }
}

TEST(Wigner, FockStateValuesAtOrigin) {
  EXPECT_NEAR(wigner(DensityMatrix::fock(1, 4), 0, 0), -1.0 / kPi, 1e-15);
  EXPECT_NEAR(wigner(DensityMatrix::vacuum(4), 0, 0), 1.0 / kPi, 1e-15);
  const std::vector<double> diag{0.18, 0.786, 0.03, 0.004};
  const DensityMatrix rho = DensityMatrix::from_diagonal(diag, 10);
  EXPECT_NEAR(wigner(rho, 0, 0), (0.18 - 0.786 + 0.03 - 0.004) / kPi, 1e-12);
  EXPECT_NEAR(wigner(rho, 0, 0), -0.1846, 1e-4);
}

TEST(Wigner, OriginValueIsParityForRandomStates) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho = testing_util::random_state(rng, 10, 10);
    double parity = 0.0;
    for (int n = 0; n <= 10; ++n) parity += (n % 2 == 0 ? 1 : -1) * rho.population(n);
    EXPECT_NEAR(wigner(rho, 0, 0), parity / kPi, 1e-10);
  }
}

TEST(Wigner, KernelMatchesWeylTransformOracle) {
  // Off-diagonal kernels pin down the phase convention.
  for (auto [m, n] : {std::pair{1, 0}, {2, 0}, {3, 1}, {2, 2}, {4, 1}}) {
    ComplexMatrix op = ComplexMatrix::Zero(6, 6);
    // rho = (|m><m| + |n><n|)/2 + c|m><n| + c*|n><m| isolates the kernel
    const Complex c(0.2, 0.1);
    op(m, m) += 0.5;
    op(n, n) += 0.5;
    if (m != n) {
      op(m, n) = c;
      op(n, m) = std::conj(c);
    }
    const DensityMatrix rho = DensityMatrix::from_matrix(op);
    for (auto [x, p] : {std::pair{0.3, -0.7}, {-1.1, 0.4}, {0.9, 1.2}}) {
      Complex expected = 0.5 * (wigner_kernel_oracle(m, m, x, p) + wigner_kernel_oracle(n, n, x, p));
      if (m != n) expected += c * wigner_kernel_oracle(m, n, x, p) + std::conj(c) * wigner_kernel_oracle(n, m, x, p);
      EXPECT_NEAR(expected.imag(), 0.0, 1e-10);
      EXPECT_NEAR(wigner(rho, x, p), expected.real(), 1e-9) << "m=" << m << " n=" << n;
    }
  }
}

TEST(Wigner, BoundedByInversePi) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const DensityMatrix rho = testing_util::random_state(rng, 8, 8);
    for (double x = -3; x <= 3; x += 0.5)
      for (double p = -3; p <= 3; p += 0.5) EXPECT_LE(std::abs(wigner(rho, x, p)), 1.0 / kPi + 1e-12);
  }
}

TEST(WignerGrid, NormalizationAndMinimum) {
  const WignerGrid vac = wigner_grid(DensityMatrix::vacuum(4), {-6, 6}, {-6, 6}, 121);
  EXPECT_NEAR(vac.integral(), 1.0, 1e-3);
  const WignerGrid one = wigner_grid(DensityMatrix::fock(1, 4), {-6, 6}, {-6, 6}, 121);
  EXPECT_NEAR(one.integral(), 1.0, 1e-3);
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  one.values.minCoeff(&i, &j);
  EXPECT_EQ(i, 60);
  EXPECT_EQ(j, 60);
  EXPECT_THROW(wigner_grid(DensityMatrix::vacuum(4), {1, 1}, {-1, 1}, 10), std::invalid_argument);
}

TEST(WignerGrid, HeraldedLikeStateKeepsNegativeCrossSection) {
  const std::vector<double> diag{0.18, 0.786, 0.03, 0.004};
  const WignerGrid g = wigner_grid(DensityMatrix::from_diagonal(diag, 10), {-4, 4}, {0, 0.0001}, 81);
  // cross-section along x: negative dip at the origin, positive ring, decaying tails
  EXPECT_LT(g.values(40, 0), -0.15);
  EXPECT_GT(g.values(40 + 10, 0), 0.0);
  EXPECT_NEAR(g.values(0, 0), 0.0, 1e-4);
  for (int k = 1; k <= 10; ++k) EXPECT_NEAR(g.values(40 - k, 0), g.values(40 + k, 0), 1e-12);
}

TEST(WignerGrid, CsvLayout) {
  const WignerGrid g = wigner_grid(DensityMatrix::vacuum(2), {-1, 1}, {-2, 2}, 3);
  std::ostringstream os;
  write_wigner_csv(os, g);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "x\\p,-2,0,2");
  std::string row;
  std::getline(is, row);
  EXPECT_EQ(row.substr(0, 3), "-1,");
}

TEST(Loss, IdentityAndBinomialExamples) {
  std::mt19937_64 rng(1);
  const DensityMatrix rho = testing_util::random_state(rng, 6, 6);
  EXPECT_LT((apply_loss(rho, 1.0).matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 1e-15);

  const DensityMatrix one = apply_loss(DensityMatrix::fock(1, 4), 0.85);
  EXPECT_NEAR(one.population(0), 0.15, 1e-15);
  EXPECT_NEAR(one.population(1), 0.85, 1e-15);

  const DensityMatrix two = apply_loss(DensityMatrix::fock(2, 4), 0.5);
  EXPECT_NEAR(two.population(0), 0.25, 1e-15);
  EXPECT_NEAR(two.population(1), 0.50, 1e-15);
  EXPECT_NEAR(two.population(2), 0.25, 1e-15);

  EXPECT_THROW(apply_loss(rho, 1.2), std::invalid_argument);
  EXPECT_THROW(apply_loss(rho, -0.1), std::invalid_argument);
}

TEST(Loss, SemigroupComposition) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10; ++i) {
    const DensityMatrix rho = testing_util::random_state(rng, 8, 8);
    for (double a : {0.3, 0.5, 0.9}) {
      for (double b : {0.3, 0.5, 0.9}) {
        const ComplexMatrix lhs = apply_loss(apply_loss(rho, a), b).matrix();
        const ComplexMatrix rhs = apply_loss(rho, a * b).matrix();
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(Loss, SinglePhotonFidelityEqualsEfficiency) {
  for (double eta : {0.0, 0.25, 0.5, 0.85, 1.0}) {
    EXPECT_EQ(fidelity_with_fock(apply_loss(DensityMatrix::fock(1, 5), eta), 1), eta);
  }
}

TEST(LossInversion, MeasuredDiagonalReachesNinetyOnePercent) {
  const std::vector<double> diag{0.18, 0.786, 0.03, 0.004};
  const LossInversion inv = invert_loss(DensityMatrix::from_diagonal(diag, 10), 0.85);
  // triangular solve done independently with numpy
  EXPECT_NEAR(inv.rho.population(0), 0.04220639, 1e-8);
  EXPECT_NEAR(inv.rho.population(1), 0.91268878, 1e-8);
  EXPECT_NEAR(inv.rho.population(2), 0.03859149, 1e-8);
  EXPECT_NEAR(inv.rho.population(3), 0.00651333, 1e-8);
  EXPECT_EQ(inv.status, InversionStatus::physical);
  const std::vector<double> renorm = renormalized_diagonal(inv.rho, 2);
  EXPECT_NEAR(renorm[1], 0.9186724, 1e-7);
}

TEST(LossInversion, IdentityAndRoundtrip) {
  std::mt19937_64 rng(99);
  const DensityMatrix base = testing_util::random_state(rng, 8, 10);
  EXPECT_LT((invert_loss(base, 1.0).rho.matrix() - base.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho = testing_util::random_state(rng, 8, 10);  // support <= n_max - 2
    const LossInversion inv = invert_loss(rho, 0.7);
    const ComplexMatrix back = apply_loss(inv.rho, 0.7).matrix();
    EXPECT_LT((back - rho.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LossInversion, MatchesFormalReciprocalChannel) {
  // The inverse of loss eta is the same binomial map evaluated at 1/eta.
  std::mt19937_64 rng(4);
  const DensityMatrix rho = apply_loss(testing_util::random_state(rng, 5, 6), 0.6);
  const ComplexMatrix inv = invert_loss(rho, 0.6).rho.matrix();
  const int d = rho.dim();
  const double e = 1.0 / 0.6;
  ComplexMatrix oracle = ComplexMatrix::Zero(d, d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      for (int k = 0; m + k < d && n + k < d; ++k) {
        const double c = std::sqrt(std::tgamma(m + k + 1.0) / (std::tgamma(m + 1.0) * std::tgamma(k + 1.0)) *
                                   std::tgamma(n + k + 1.0) / (std::tgamma(n + 1.0) * std::tgamma(k + 1.0)));
        oracle(m, n) += c * std::pow(e, 0.5 * (m + n)) * std::pow(1.0 - e, k) * rho(m + k, n + k);
      }
  EXPECT_LT((inv - oracle).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LossInversion, NoisyInputIsFlaggedNotClipped) {
  // More vacuum than loss 0.5 can produce from any physical state.
  const std::vector<double> diag{0.2, 0.8};
  const LossInversion inv = invert_loss(DensityMatrix::from_diagonal(diag, 4), 0.5);
  EXPECT_EQ(inv.status, InversionStatus::non_physical);
  EXPECT_NEAR(inv.rho.population(0), -0.6, 1e-12);
  EXPECT_NEAR(inv.rho.population(1), 1.6, 1e-12);
  EXPECT_NEAR(inv.psd_distance, 0.6, 1e-12);
  EXPECT_THROW(invert_loss(inv.rho, 0.0), std::invalid_argument);
}

TEST(Fidelity, FockOverlap) {
  EXPECT_EQ(fidelity_with_fock(DensityMatrix::fock(1, 3), 1), 1.0);
  EXPECT_EQ(fidelity_with_fock(DensityMatrix::vacuum(3), 1), 0.0);
  const std::vector<double> diag{0.18, 0.786, 0.03, 0.004};
  EXPECT_DOUBLE_EQ(fidelity_with_fock(DensityMatrix::from_diagonal(diag, 10), 1), 0.786);
  EXPECT_THROW(fidelity_with_fock(DensityMatrix::vacuum(3), 4), std::invalid_argument);
}

TEST(Serialization, JsonRoundTripIsExact) {
  std::mt19937_64 rng(17);
  const DensityMatrix rho = testing_util::random_state(rng, 5, 5);
  const DensityMatrix back = density_matrix_from_json(to_json(rho));
  EXPECT_EQ(back.n_max(), 5);
  EXPECT_EQ((back.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(density_matrix_from_json(R"({"n_max": 1, "re": [[1]], "im": [[0]]})"), std::invalid_argument);
  EXPECT_THROW(density_matrix_from_json("not json"), std::invalid_argument);
}

TEST(QuadratureSampleReduction, ShiftByPiFlipsSign) {
  const QuadratureSample a = QuadratureSample::reduced(0.7, kPi + 0.3);
  EXPECT_NEAR(a.theta, 0.3, 1e-15);
  EXPECT_EQ(a.x, -0.7);
  const QuadratureSample b = QuadratureSample::reduced(0.7, -0.3);
  EXPECT_NEAR(b.theta, kPi - 0.3, 1e-15);
  EXPECT_EQ(b.x, -0.7);
  // same outcome probability on either side of the reduction
  std::mt19937_64 rng(8);
  const DensityMatrix rho = testing_util::random_state(rng, 6, 6);
  EXPECT_NEAR(quadrature_pdf(rho, kPi + 0.3, 0.7), quadrature_pdf(rho, a.theta, a.x), 1e-14);
}
