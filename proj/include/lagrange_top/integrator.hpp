#pragma once

// Fixed-step classical Runge-Kutta integration of the Euler-Poisson system
// with conserved-quantity drift tracking and CSV export.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagrange_top/top.hpp"

namespace lagrange_top {

/// Thrown when the state stops being finite. Carries the step index at which
/// the blow-up was detected.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

struct IntegrationConfig {
  double step = 1e-3;
  std::size_t n_steps = 200000;
  bool project_gamma = false;
  std::size_t record_every = 1;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
      throw std::invalid_argument("integration step must be finite and > 0");
    }
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<TopState> states;
  std::vector<ConservedSet> drift;  ///< conserved(state) - conserved(initial)

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// One classical RK4 step of size h. Throws IntegrationError if the result is
/// not finite.
inline TopState step_rk4(const TopParams& p, const TopState& s, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step_rk4: h must be > 0");
  const StateDerivative k1 = rhs(p, s);
  const StateDerivative k2 = rhs(p, axpy(s, 0.5 * h, k1));
  const StateDerivative k3 = rhs(p, axpy(s, 0.5 * h, k2));
  const StateDerivative k4 = rhs(p, axpy(s, h, k3));

  TopState out;
  const double w = h / 6.0;
  for (std::size_t i = 0; i < 3; ++i) {
    out.M[i] = s.M[i] + w * (k1.M[i] + 2.0 * k2.M[i] + 2.0 * k3.M[i] + k4.M[i]);
    out.gamma[i] = s.gamma[i] +
                   w * (k1.gamma[i] + 2.0 * k2.gamma[i] + 2.0 * k3.gamma[i] + k4.gamma[i]);
  }
  if (!out.is_finite()) {
    throw IntegrationError(0, "step_rk4: non-finite state");
  }
  return out;
}

namespace detail {
inline void normalize_gamma(TopState& s) {
  const double n = norm(s.gamma);
  for (double& x : s.gamma) x /= n;
}
}  // namespace detail

/// Integrates from `initial` for config.n_steps steps. Samples are recorded
/// at t = 0, every record_every steps, and at the final step.
inline Trajectory integrate(const TopParams& p, const TopState& initial,
                            const IntegrationConfig& config) {
  config.validate();
  if (!initial.is_finite()) throw std::invalid_argument("integrate: non-finite initial state");
  if (std::abs(norm(initial.gamma) - 1.0) > 1e-9) {
    throw std::invalid_argument("integrate: initial gamma must have unit norm");
  }

  const ConservedSet c0 = conserved(p, initial);
  Trajectory traj;
  const std::size_t n_samples = config.n_steps / config.record_every + 2;
  traj.times.reserve(n_samples);
  traj.states.reserve(n_samples);
  traj.drift.reserve(n_samples);

  auto record = [&](std::size_t k, const TopState& s) {
    traj.times.push_back(static_cast<double>(k) * config.step);
    traj.states.push_back(s);
    traj.drift.push_back(conserved(p, s) - c0);
  };

  TopState s = initial;
  record(0, s);
  for (std::size_t k = 1; k <= config.n_steps; ++k) {
    try {
      s = step_rk4(p, s, config.step);
    } catch (const IntegrationError&) {
      throw IntegrationError(k, "integrate: non-finite state at step " + std::to_string(k));
    }
    if (config.project_gamma) detail::normalize_gamma(s);
    if (k % config.record_every == 0 || k == config.n_steps) record(k, s);
  }
  return traj;
}

/// Max |drift| per conserved quantity over the trajectory.
inline ConservedSet drift_report(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("drift_report: empty trajectory");
  ConservedSet worst;
  for (const ConservedSet& d : traj.drift) {
    worst.H = std::max(worst.H, std::abs(d.H));
    worst.C1 = std::max(worst.C1, std::abs(d.C1));
    worst.C2 = std::max(worst.C2, std::abs(d.C2));
    worst.F = std::max(worst.F, std::abs(d.F));
  }
  return worst;
}

/// 17 significant digits, enough for an exact round trip.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_real: conversion failed");
  return std::string(buf, end);
}

inline constexpr const char* kTrajectoryCsvHeader = "t,M1,M2,M3,g1,g2,g3,dH,dC1,dC2,dF";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kTrajectoryCsvHeader << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const TopState& s = traj.states[i];
    const ConservedSet& d = traj.drift[i];
    os << format_real(traj.times[i]);
    for (double x : s.as_array()) os << ',' << format_real(x);
    for (double x : d.as_array()) os << ',' << format_real(x);
    os << '\n';
  }
}

}  // namespace lagrange_top
