#pragma once

// Isolation of the vertical uniform rotation inside the joint level set of
// the first integrals {H, C1, C2, F}.
//
// An equilibrium that is an isolated root of
//   H = H_e, C1 = 1, C2 = M3_e, F = M3_e
// admits a Lyapunov function built from those integrals. On M3 = M3_e the
// system reduces, in polar coordinates M1 + i M2 = u e^{i phi} and
// gamma1 + i gamma2 = v e^{i theta}, to
//   u^2 = 2 A m g z (1 - gamma3)
//   v^2 = 1 - gamma3^2
//   u v cos(theta - phi) = M3_e (1 - gamma3).
// For 0 < gamma3 < 1 the last equation reads
//   sqrt(2 A m g z) sqrt(1 + gamma3) cos(theta - phi) = M3_e,
// which has solutions arbitrarily close to gamma3 = 1 exactly when
// M3_e^2 < 4 A m g z.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lagrange_top/top.hpp"

namespace lagrange_top {

/// Polar coordinates of the transverse components plus gamma3.
struct ReducedPoint {
  double u = 0.0;      ///< sqrt(M1^2 + M2^2)
  double phi = 0.0;    ///< momentum phase (rad)
  double v = 0.0;      ///< sqrt(gamma1^2 + gamma2^2)
  double theta = 0.0;  ///< gamma phase (rad)
  double gamma3 = 1.0;

  /// Full state with third momentum component M3.
  TopState to_state(double M3) const noexcept {
    return {{u * std::cos(phi), u * std::sin(phi), M3},
            {v * std::cos(theta), v * std::sin(theta), gamma3}};
  }

  static ReducedPoint from_state(const TopState& s) noexcept {
    ReducedPoint p;
    p.u = std::hypot(s.M[0], s.M[1]);
    p.phi = std::atan2(s.M[1], s.M[0]);
    p.v = std::hypot(s.gamma[0], s.gamma[1]);
    p.theta = std::atan2(s.gamma[1], s.gamma[0]);
    p.gamma3 = s.gamma[2];
    return p;
  }
};

/// Residuals of the level-set system at `state` against the equilibrium
/// values; identical to conserved(state) - conserved(equilibrium(M3_eq)).
inline ConservedSet level_residuals(const TopParams& p, double M3_eq, const TopState& state) noexcept {
  return conserved(p, state) - conserved(p, equilibrium(M3_eq));
}

/// Residuals of the reduced polar system.
inline std::array<double, 3> reduced_residuals(const TopParams& p, double M3_eq,
                                               const ReducedPoint& q) noexcept {
  const double s = 1.0 - q.gamma3;
  return {q.u * q.u - 2.0 * p.A() * p.mgz() * s,
          q.v * q.v - (1.0 - q.gamma3 * q.gamma3),
          q.u * q.v * std::cos(q.theta - q.phi) - M3_eq * s};
}

/// Explicit non-trivial solutions of the level-set system converging to the
/// equilibrium as gamma3 -> 1. The phase gauge is fixed at phi = 0.
class WitnessFamily {
 public:
  static constexpr double kDomainMargin = 1e-9;

  WitnessFamily(const TopParams& p, double M3_eq)
      : M3_(M3_eq), two_Amgz_(2.0 * p.A() * p.mgz()) {
    if (!(threshold_margin(p, M3_eq) < 0.0)) {
      throw std::invalid_argument("WitnessFamily: equilibrium is isolated; no witnesses exist");
    }
    // Just below the threshold the margin shrinks with the gap to 1; if
    // rounding closes the gap entirely, the last double below 1 remains.
    const double raw = M3_ * M3_ / two_Amgz_ - 1.0;
    gamma3_min_ = std::max(0.0, raw + std::min(kDomainMargin, 0.5 * (1.0 - raw)));
    if (!(gamma3_min_ < 1.0)) gamma3_min_ = std::nextafter(1.0, 0.0);
  }

  double M3() const noexcept { return M3_; }
  /// Smallest admissible gamma3: max(0, M3^2 / (2 A m g z) - 1), nudged
  /// inward so that the arccos argument stays strictly inside [-1, 1].
  double gamma3_min() const noexcept { return gamma3_min_; }

  bool in_domain(double gamma3) const noexcept {
    return gamma3 >= gamma3_min_ && gamma3 < 1.0;
  }

  ReducedPoint reduced(double gamma3) const {
    if (!in_domain(gamma3)) {
      throw std::domain_error("witness gamma3 = " + std::to_string(gamma3) +
                              " outside [" + std::to_string(gamma3_min_) + ", 1)");
    }
    const double c =
        std::clamp(M3_ / (std::sqrt(two_Amgz_) * std::sqrt(1.0 + gamma3)), -1.0, 1.0);
    ReducedPoint q;
    q.u = std::sqrt(two_Amgz_ * (1.0 - gamma3));
    q.v = std::sqrt(1.0 - gamma3 * gamma3);
    q.phi = 0.0;
    q.theta = std::acos(c);
    q.gamma3 = gamma3;
    return q;
  }

  TopState operator()(double gamma3) const { return reduced(gamma3).to_state(M3_); }

  /// Distance from the equilibrium of the witness at gamma3. With
  /// s = 1 - gamma3 it equals sqrt((2 A m g z + 2) s).
  double distance_at(double gamma3) const noexcept {
    return std::sqrt((two_Amgz_ + 2.0) * (1.0 - gamma3));
  }

  /// gamma3 whose witness lies at Euclidean distance d from the equilibrium.
  double gamma3_at_distance(double d) const noexcept {
    return 1.0 - d * d / (two_Amgz_ + 2.0);
  }

 private:
  double M3_;
  double two_Amgz_;
  double gamma3_min_;
};

enum class Isolation { Isolated, NotIsolated };

inline const char* to_string(Isolation v) noexcept {
  return v == Isolation::Isolated ? "ISOLATED" : "NOT_ISOLATED";
}

struct IsolationVerdict {
  Isolation verdict = Isolation::Isolated;
  std::optional<WitnessFamily> witness_family;  ///< set iff NotIsolated

  bool isolated() const noexcept { return verdict == Isolation::Isolated; }
};

/// Isolated iff M3_eq^2 >= 4 A m g z. Otherwise returns the witness family
/// that demonstrates non-isolation.
inline IsolationVerdict certify_isolation(const TopParams& p, double M3_eq) {
  if (!std::isfinite(M3_eq)) {
    throw std::invalid_argument("certify_isolation: M3 must be finite");
  }
  if (threshold_margin(p, M3_eq) >= 0.0) return {Isolation::Isolated, std::nullopt};
  return {Isolation::NotIsolated, WitnessFamily(p, M3_eq)};
}

struct GridSearchResult {
  double min_residual = 0.0;  ///< smallest normalized residual on the grid
  double gamma3 = 0.0;        ///< argmin
  double delta = 0.0;         ///< argmin, theta - phi
};

/// Brute-force check of isolation. Scans gamma3 in [1 - radius, 1) and the
/// phase difference delta in [0, pi], solving the first two reduced
/// equations exactly for u and v and reporting the third residual divided
/// by (1 - gamma3). Ties go to the lowest gamma3, then the lowest delta.
/// `workers` = 0 uses the hardware concurrency.
inline GridSearchResult grid_search_oracle(const TopParams& p, double M3_eq, double radius,
                                           std::size_t n_gamma3, std::size_t n_angle,
                                           std::size_t workers = 0) {
  if (!(radius > 0.0 && radius < 1.0)) {
    throw std::invalid_argument("grid_search_oracle: radius must lie in (0, 1)");
  }
  if (n_gamma3 < 1 || n_angle < 2) {
    throw std::invalid_argument("grid_search_oracle: need n_gamma3 >= 1 and n_angle >= 2");
  }

  const double two_Amgz = 2.0 * p.A() * p.mgz();
  const double g_lo = 1.0 - radius;
  const double g_step = radius / static_cast<double>(n_gamma3);
  const double d_step = std::numbers::pi / static_cast<double>(n_angle - 1);

  struct Best {
    double value;
    std::size_t i, j;
  };

  auto scan = [&](std::size_t i_begin, std::size_t i_end) {
    Best best{std::numeric_limits<double>::infinity(), n_gamma3, 0};
    for (std::size_t i = i_begin; i < i_end; ++i) {
      const double g3 = g_lo + static_cast<double>(i) * g_step;
      const double s = 1.0 - g3;
      const double u = std::sqrt(two_Amgz * s);
      const double v = std::sqrt(1.0 - g3 * g3);
      for (std::size_t j = 0; j < n_angle; ++j) {
        const double delta = static_cast<double>(j) * d_step;
        const double r = std::abs(u * v * std::cos(delta) - M3_eq * s) / s;
        if (r < best.value) best = {r, i, j};
      }
    }
    return best;
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n_gamma3);

  std::vector<std::future<Best>> parts;
  const std::size_t chunk = (n_gamma3 + workers - 1) / workers;
  for (std::size_t begin = 0; begin < n_gamma3; begin += chunk) {
    const std::size_t end = std::min(n_gamma3, begin + chunk);
    parts.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
                               scan, begin, end));
  }

  // Chunks are in ascending gamma3 order, so a strict comparison keeps the
  // lowest-index minimum.
  Best best{std::numeric_limits<double>::infinity(), n_gamma3, 0};
  for (auto& f : parts) {
    const Best b = f.get();
    if (b.value < best.value) best = b;
  }
  return {best.value, g_lo + static_cast<double>(best.i) * g_step,
          static_cast<double>(best.j) * d_step};
}

}  // namespace lagrange_top
