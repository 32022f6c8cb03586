#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "lagrange_top/experiment.hpp"
#include "lagrange_top/linear_stability.hpp"
#include "oracles.hpp"

namespace lagrange_top {
namespace {

using cd = std::complex<double>;
const TopParams kUnit(1.0, 1.0, 1.0, 1.0, 1.0);

double max_entry_diff(const Matrix6& a, const Matrix6& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
  }
  return worst;
}

bool contains(const std::array<cd, 4>& set, cd value, double tol) {
  return std::any_of(set.begin(), set.end(), [&](cd z) { return std::abs(z - value) <= tol; });
}

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> spin(-5.0, 5.0);
  for (int k = 0; k < 200; ++k) {
    const TopParams p = oracle::random_params(rng);
    const double M3 = spin(rng);
    const Matrix6 fd = oracle::fd_jacobian(p, equilibrium(M3));
    ASSERT_LE(max_entry_diff(jacobian(p, M3), fd), 1e-8) << "sample " << k;
  }
}

TEST(Jacobian, EqualMomentsDecoupleMomentumRows) {
  const TopParams p(1.5, 1.5, 2.0, 3.0, 0.5);
  const Matrix6 J = jacobian(p, 4.0);
  EXPECT_EQ(J[0][1], 0.0);
  EXPECT_EQ(J[1][0], 0.0);
  EXPECT_EQ(J[0][4], p.mgz());
  EXPECT_EQ(J[1][3], -p.mgz());
}

TEST(Jacobian, NonSpinningTopEntries) {
  const TopParams p(2.0, 0.5, 1.0, 3.0, 0.5);
  const Matrix6 J = jacobian(p, 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const double x = std::abs(J[i][j]);
      EXPECT_TRUE(x == 0.0 || x == p.mgz() || x == 1.0 / p.A()) << i << "," << j;
    }
  }
  EXPECT_EQ(J[0][4], 1.5);
  EXPECT_EQ(J[1][3], -1.5);
  EXPECT_EQ(J[3][1], -0.5);
  EXPECT_EQ(J[4][0], 0.5);
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_EQ(J[2][j], 0.0);
    EXPECT_EQ(J[5][j], 0.0);
  }
}

TEST(Eigenvalues, FastTopIsPurelyImaginary) {
  const auto ev = eigenvalues(kUnit, 3.0);
  const double s5 = std::sqrt(5.0);
  for (cd expected : {cd(0, (-3 + s5) / 2), cd(0, (-3 - s5) / 2), cd(0, (3 - s5) / 2),
                      cd(0, (3 + s5) / 2)}) {
    EXPECT_TRUE(contains(ev, expected, 1e-14)) << expected;
  }
  const Matrix6 J = jacobian(kUnit, 3.0);
  for (cd l : ev) EXPECT_LE(oracle::scaled_characteristic_residual(J, l), 1e-10);
}

TEST(Eigenvalues, NonSpinningTopHasUnitGrowth) {
  const auto ev = eigenvalues(kUnit, 0.0);
  EXPECT_EQ(std::count_if(ev.begin(), ev.end(), [](cd z) { return z == cd(1.0, 0.0); }), 2);
  EXPECT_EQ(std::count_if(ev.begin(), ev.end(), [](cd z) { return z == cd(-1.0, 0.0); }), 2);
  EXPECT_EQ(classify_spectral(kUnit, 0.0).growth_rate, 1.0);
}

TEST(Eigenvalues, BoundaryGivesRepeatedImaginaryRoot) {
  const auto ev = eigenvalues(kUnit, 2.0);
  EXPECT_EQ(ev[0], ev[1]);
  EXPECT_EQ(ev[0].real(), 0.0);
  EXPECT_EQ(std::abs(ev[0].imag()), 1.0);
  EXPECT_EQ(classify_spectral(kUnit, 2.0).growth_rate, 0.0);
}

TEST(Eigenvalues, SatisfyCharacteristicEquationOfFiniteDifferenceJacobian) {
  // Independent of the analytic block: the eigenvalues annihilate
  // det(J_fd - lambda I) up to finite-difference error.
  const Matrix6 fd = oracle::fd_jacobian(kUnit, equilibrium(1.0));
  for (cd l : eigenvalues(kUnit, 1.0)) {
    EXPECT_LE(oracle::scaled_characteristic_residual(fd, l), 1e-8) << l;
  }
}

TEST(Eigenvalues, RandomParametersSatisfyCharacteristicEquation) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> spin(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const TopParams p = oracle::random_params(rng);
    const double M3 = spin(rng);
    const Matrix6 J = jacobian(p, M3);
    const auto ev = eigenvalues(p, M3);
    for (cd l : ev) {
      ASSERT_LE(oracle::scaled_characteristic_residual(J, l), 1e-10) << "sample " << k;
      ASSERT_TRUE(contains(ev, std::conj(l), 0.0)) << "conjugate missing, sample " << k;
    }
  }
}

TEST(Eigenvalues, ScaleCovariance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> spin(-4.0, 4.0);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  for (int k = 0; k < 200; ++k) {
    const TopParams p = oracle::random_params(rng);
    const double M3 = spin(rng);
    const double s = scale(rng);
    const TopParams q(p.A(), p.C(), p.m() * s * s, p.g(), p.z());
    const auto base = eigenvalues(p, M3);
    const auto scaled = eigenvalues(q, s * M3);
    for (std::size_t i = 0; i < 4; ++i) {
      ASSERT_NEAR(std::abs(scaled[i] - s * base[i]), 0.0, 1e-12 * (1.0 + s * std::abs(base[i])));
    }
  }
}

TEST(ClassifySpectral, ReferenceCases) {
  const SpectralReport fast = classify_spectral(kUnit, 3.0);
  EXPECT_EQ(fast.verdict, SpectralVerdict::SpectrallyStable);
  EXPECT_EQ(fast.threshold, 2.0);
  EXPECT_EQ(fast.margin, 5.0);

  const SpectralReport edge = classify_spectral(kUnit, 2.0);
  EXPECT_EQ(edge.verdict, SpectralVerdict::SpectrallyStable);
  EXPECT_EQ(edge.growth_rate, 0.0);

  const SpectralReport slow = classify_spectral(kUnit, 1.0);
  EXPECT_EQ(slow.verdict, SpectralVerdict::SpectrallyUnstable);
  EXPECT_NEAR(slow.growth_rate, std::sqrt(3.0) / 2.0, 1e-15);

  EXPECT_THROW(classify_spectral(kUnit, std::nan("")), std::invalid_argument);
}

TEST(ClassifySpectral, AgreesWithSignTestIncludingBoundary) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> spin(-6.0, 6.0);
  std::uniform_real_distribution<double> tiny(-1e-9, 1e-9);
  int boundary_samples = 0;
  for (int k = 0; k < 2000; ++k) {
    const TopParams p = oracle::random_params(rng);
    double M3 = spin(rng);
    if (k % 2 == 0) {
      // |M3^2 - 4Amgz| <= 1e-9, both signs of M3.
      const double target = 4.0 * p.A() * p.mgz() + (k % 4 == 0 ? 0.0 : tiny(rng));
      M3 = (k % 3 == 0 ? -1.0 : 1.0) * std::sqrt(std::max(0.0, target));
      ++boundary_samples;
      ASSERT_LE(std::abs(threshold_margin(p, M3)), 1e-9 + 1e-14);
    }
    const SpectralReport r = classify_spectral(p, M3);
    const bool closed = threshold_margin(p, M3) >= 0.0;
    ASSERT_EQ(r.verdict == SpectralVerdict::SpectrallyStable, closed) << "sample " << k;
    ASSERT_EQ(r.verdict == SpectralVerdict::SpectrallyUnstable, r.growth_rate > 0.0);
    ASSERT_EQ(is_stable_closed_form(p, M3), closed);
  }
  EXPECT_EQ(boundary_samples, 1000);
}

TEST(MeasuredGrowthRate, NonSpinningTop) {
  const TopState eq = equilibrium(0.0);
  const TopState start = perturbed_state(eq, 1e-8, {0.3, 1.1});
  const Trajectory traj = integrate(kUnit, start, {1e-3, 20000, false, 10});
  const auto window = growth_fit_window(traj, eq);
  ASSERT_TRUE(window.has_value());
  EXPECT_NEAR(measured_growth_rate(traj, eq, *window), 1.0, 0.1);
}

TEST(MeasuredGrowthRate, SlowTop) {
  const TopState eq = equilibrium(1.0);
  const TopState start = perturbed_state(eq, 1e-8, {2.0, 4.0});
  const Trajectory traj = integrate(kUnit, start, {1e-3, 40000, false, 10});
  const auto window = growth_fit_window(traj, eq);
  ASSERT_TRUE(window.has_value());
  const double predicted = std::sqrt(3.0) / 2.0;
  EXPECT_NEAR(measured_growth_rate(traj, eq, *window), predicted, 0.1 * predicted);
}

TEST(MeasuredGrowthRate, StableTopHasNoSecularGrowth) {
  const TopState eq = equilibrium(3.0);
  const TopState start = perturbed_state(eq, 1e-4, {0.7, 2.9});
  const Trajectory traj = integrate(kUnit, start, {1e-3, 200000, false, 10});
  const double slope = measured_growth_rate(traj, eq, {0, traj.size() - 1});
  EXPECT_NEAR(slope, 0.0, 0.02);
}

TEST(MeasuredGrowthRate, RejectsWindowOutsideLinearRegime) {
  const TopState eq = equilibrium(0.0);
  const TopState start = perturbed_state(eq, 1e-4, {0.0, 0.0});
  const Trajectory traj = integrate(kUnit, start, {1e-3, 20000, false, 10});
  EXPECT_THROW(measured_growth_rate(traj, eq, {0, traj.size() - 1}), FitWindowError);
  EXPECT_THROW(measured_growth_rate(traj, eq, {5, 5}), FitWindowError);
  EXPECT_THROW(measured_growth_rate(traj, eq, {0, traj.size()}), FitWindowError);
}

TEST(GrowthFitWindow, EmptyWhenDeviationNeverGrows) {
  const Trajectory traj = integrate(kUnit, equilibrium(2.0), {1e-3, 100, false, 1});
  EXPECT_FALSE(growth_fit_window(traj, equilibrium(2.0)).has_value());
}

}  // namespace
}  // namespace lagrange_top
