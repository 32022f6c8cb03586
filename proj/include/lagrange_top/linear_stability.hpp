#pragma once

// Linearization of the Euler-Poisson system at the vertical uniform rotation
// (0, 0, M3, 0, 0, 1).
//
// With a = M3 (1/C - 1/A), b = m g z and c = M3 / C, the transverse
// perturbation (m1, m2, g1, g2) obeys
//
//   m1' =  a m2 + b g2        g1' =  c g2 - m2 / A
//   m2' = -a m1 - b g1        g2' =  m1 / A - c g1
//
// while m3' = g3' = 0. In the complex variables zeta = m1 + i m2 and
// eta = g1 + i g2 this becomes a 2x2 system whose characteristic polynomial
// is lambda^2 + i (a + c) lambda - (a c + b / A). Its discriminant equals
// (4 A m g z - M3^2) / A^2, so the spectrum leaves the imaginary axis exactly
// when M3^2 < 4 A m g z.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagrange_top/integrator.hpp"
#include "lagrange_top/top.hpp"

namespace lagrange_top {

using Matrix6 = std::array<std::array<double, 6>, 6>;

enum class SpectralVerdict { SpectrallyStable, SpectrallyUnstable };

inline const char* to_string(SpectralVerdict v) noexcept {
  return v == SpectralVerdict::SpectrallyStable ? "STABLE" : "UNSTABLE";
}

struct SpectralReport {
  std::array<std::complex<double>, 4> eigenvalues{};  ///< transverse block; the other two are 0
  SpectralVerdict verdict = SpectralVerdict::SpectrallyStable;
  double growth_rate = 0.0;  ///< max real part (1/s)
  double threshold = 0.0;    ///< 2 sqrt(A m g z)
  double margin = 0.0;       ///< M3^2 - 4 A m g z
};

/// Exact Jacobian of rhs at equilibrium(M3). State ordering is
/// (M1, M2, M3, gamma1, gamma2, gamma3).
inline Matrix6 jacobian(const TopParams& p, double M3) noexcept {
  const double a = M3 * (1.0 / p.C() - 1.0 / p.A());
  const double b = p.mgz();
  const double c = M3 / p.C();
  const double inv_A = 1.0 / p.A();

  Matrix6 J{};
  J[0][1] = a;
  J[0][4] = b;
  J[1][0] = -a;
  J[1][3] = -b;
  J[3][4] = c;
  J[3][1] = -inv_A;
  J[4][0] = inv_A;
  J[4][3] = -c;
  return J;
}

/// Transverse eigenvalues: the two roots of the complexified characteristic
/// quadratic followed by their complex conjugates.
inline std::array<std::complex<double>, 4> eigenvalues(const TopParams& p, double M3) {
  const double a = M3 * (1.0 / p.C() - 1.0 / p.A());
  const double c = M3 / p.C();
  // Reduced discriminant of lambda^2 + i (a + c) lambda - (a c + b/A).
  const double disc = -threshold_margin(p, M3) / (p.A() * p.A());
  const std::complex<double> center(0.0, -0.5 * (a + c));
  const std::complex<double> half_root =
      disc >= 0.0 ? std::complex<double>(0.5 * std::sqrt(disc), 0.0)
                  : std::complex<double>(0.0, 0.5 * std::sqrt(-disc));
  const std::complex<double> l1 = center + half_root;
  const std::complex<double> l2 = center - half_root;
  return {l1, l2, std::conj(l1), std::conj(l2)};
}

inline SpectralReport classify_spectral(const TopParams& p, double M3) {
  if (!std::isfinite(M3)) throw std::invalid_argument("classify_spectral: M3 must be finite");
  SpectralReport r;
  r.eigenvalues = eigenvalues(p, M3);
  r.growth_rate = 0.0;
  for (const auto& l : r.eigenvalues) r.growth_rate = std::max(r.growth_rate, l.real());
  r.verdict = r.growth_rate > 0.0 ? SpectralVerdict::SpectrallyUnstable
                                  : SpectralVerdict::SpectrallyStable;
  r.threshold = p.threshold();
  r.margin = threshold_margin(p, M3);
  return r;
}

/// Closed-form test M3^2 >= 4 A m g z (boundary counts as stable).
inline bool is_stable_closed_form(const TopParams& p, double M3) noexcept {
  return threshold_margin(p, M3) >= 0.0;
}

/// Thrown when a growth-rate fit window leaves the linear regime or is too
/// short to fit.
class FitWindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;  ///< inclusive
};

inline constexpr double kLinearRegimeBound = 1e-2;

/// Least-squares slope of log|state - equilibrium| against t over the
/// inclusive sample range.
inline double measured_growth_rate(const Trajectory& traj, const TopState& eq,
                                   IndexRange window,
                                   double linear_bound = kLinearRegimeBound) {
  if (window.last >= traj.size() || window.first >= window.last) {
    throw FitWindowError("measured_growth_rate: window must hold at least two samples");
  }
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const double n = static_cast<double>(window.last - window.first + 1);
  for (std::size_t i = window.first; i <= window.last; ++i) {
    const double dev = distance(traj.states[i], eq);
    if (dev > linear_bound) {
      throw FitWindowError("measured_growth_rate: deviation " + format_real(dev) +
                           " at t = " + format_real(traj.times[i]) +
                           " exceeds the linear-regime bound");
    }
    if (!(dev > 0.0)) {
      throw FitWindowError("measured_growth_rate: zero deviation at t = " +
                           format_real(traj.times[i]));
    }
    const double t = traj.times[i];
    const double y = std::log(dev);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double denom = n * stt - st * st;
  return (n * sty - st * sy) / denom;
}

/// Window for an unstable run: starts once the deviation has grown to
/// `growth_factor` times its initial value (so the growing mode dominates)
/// and ends at the last sample before the deviation first exceeds
/// `linear_bound`. Empty when fewer than `min_samples` samples qualify.
inline std::optional<IndexRange> growth_fit_window(const Trajectory& traj,
                                                   const TopState& eq,
                                                   double growth_factor = 10.0,
                                                   double linear_bound = kLinearRegimeBound,
                                                   std::size_t min_samples = 3) {
  if (traj.empty()) return std::nullopt;
  const double dev0 = distance(traj.states.front(), eq);
  if (!(dev0 > 0.0)) return std::nullopt;
  std::size_t first = traj.size();
  std::size_t last = traj.size();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double dev = distance(traj.states[i], eq);
    if (dev > linear_bound) {
      last = i;  // exclusive
      break;
    }
    if (first == traj.size() && dev >= growth_factor * dev0) first = i;
  }
  if (first == traj.size() || last == 0 || last <= first || last - first < min_samples) {
    return std::nullopt;
  }
  return IndexRange{first, last - 1};
}

}  // namespace lagrange_top
