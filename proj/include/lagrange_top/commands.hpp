#pragma once

// Subcommand bodies of the lagrange_top command-line tool. Each returns the
// process exit code and writes only to the streams it is given.

#include <cmath>
#include <complex>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "lagrange_top/experiment.hpp"
#include "lagrange_top/integrator.hpp"
#include "lagrange_top/level_set.hpp"
#include "lagrange_top/linear_stability.hpp"
#include "lagrange_top/top.hpp"

namespace lagrange_top::cli {

inline constexpr int kExitStable = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUnstable = 2;

/// "STABLE", "STABLE (boundary)" or "UNSTABLE" from the sign of the margin.
inline std::string stability_label(double margin) {
  if (margin > 0.0) return "STABLE";
  if (margin == 0.0) return "STABLE (boundary)";
  return "UNSTABLE";
}

namespace detail {

inline std::string format_complex(const std::complex<double>& z) {
  const double im = z.imag();
  return format_real(z.real()) + (std::signbit(im) ? " - " : " + ") +
         format_real(std::abs(im)) + "i";
}

/// Runs `body` with the configured output stream: the file at `path`, or
/// `fallback` when the path is empty or "-".
template <typename Body>
int with_output(const std::string& path, std::ostream& fallback, std::ostream& err, Body body) {
  if (path.empty() || path == "-") return body(fallback);
  std::ofstream file(path, std::ios::out | std::ios::trunc);
  if (!file) {
    err << "error: cannot open '" << path << "' for writing\n";
    return kExitInputError;
  }
  const int code = body(file);
  file.close();
  if (!file) {
    err << "error: failed writing '" << path << "'\n";
    return kExitInputError;
  }
  return code;
}

}  // namespace detail

/// Closed-form threshold, spectral report and isolation certificate for each
/// m3. Exit 0 when every m3 is stable, 2 when any is unstable or the three
/// verdicts disagree.
inline int cmd_classify(const TopParams& p, const std::vector<double>& m3_values,
                        std::ostream& out) {
  int code = kExitStable;
  for (double m3 : m3_values) {
    const SpectralReport spec = classify_spectral(p, m3);
    const IsolationVerdict iso = certify_isolation(p, m3);
    const bool closed = is_stable_closed_form(p, m3);
    const bool spectral = spec.verdict == SpectralVerdict::SpectrallyStable;
    const bool agree = closed == spectral && closed == iso.isolated();

    out << "m3:          " << format_real(m3) << '\n'
        << "threshold:   " << format_real(spec.threshold) << '\n'
        << "margin:      " << format_real(spec.margin) << '\n'
        << "spectral:    " << to_string(spec.verdict)
        << "  growth_rate " << format_real(spec.growth_rate) << '\n'
        << "eigenvalues:";
    for (const auto& l : spec.eigenvalues) out << "  " << detail::format_complex(l);
    out << '\n'
        << "isolation:   " << to_string(iso.verdict) << '\n';
    if (agree) {
      out << "verdict:     " << stability_label(spec.margin) << '\n';
    } else {
      out << "verdict:     MISMATCH\n";
    }
    if (!agree || !closed) code = kExitUnstable;
  }
  return code;
}

/// Isolation verdict only. Exit 0 when isolated, 2 otherwise.
inline int cmd_certify(const TopParams& p, const std::vector<double>& m3_values,
                       std::ostream& out) {
  int code = kExitStable;
  for (double m3 : m3_values) {
    const IsolationVerdict iso = certify_isolation(p, m3);
    out << "m3 " << format_real(m3) << ": " << to_string(iso.verdict);
    if (iso.witness_family) {
      out << " (witnesses for gamma3 in [" << format_real(iso.witness_family->gamma3_min())
          << ", 1))";
      code = kExitUnstable;
    }
    out << '\n';
  }
  return code;
}

inline constexpr const char* kWitnessCsvHeader =
    "gamma3,M1,M2,M3,g1,g2,g3,res_H,res_C1,res_C2,res_F,distance";

/// Table of explicit level-set solutions near a non-isolated equilibrium.
/// Exit 2 without a table when the equilibrium is isolated.
inline int cmd_witness(const TopParams& p, double m3, const std::vector<double>& gamma3_values,
                       std::ostream& out, std::ostream& err) {
  const IsolationVerdict iso = certify_isolation(p, m3);
  if (iso.isolated()) {
    err << "equilibrium is isolated (m3^2 >= 4Amgz); no witnesses exist\n";
    return kExitUnstable;
  }
  const WitnessFamily& family = *iso.witness_family;
  const TopState eq = equilibrium(m3);
  out << kWitnessCsvHeader << '\n';
  for (double g3 : gamma3_values) {
    if (!family.in_domain(g3)) {
      out << format_real(g3) << ",error: gamma3 outside [" << format_real(family.gamma3_min())
          << ", 1)\n";
      continue;
    }
    const TopState w = family(g3);
    out << format_real(g3);
    for (double x : w.as_array()) out << ',' << format_real(x);
    for (double r : level_residuals(p, m3, w).as_array()) out << ',' << format_real(r);
    out << ',' << format_real(distance(w, eq)) << '\n';
  }
  return kExitStable;
}

/// One perturbed run from equilibrium(m3) written as trajectory CSV. Uses the
/// first m3 value.
inline int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  validate(cfg);
  const double m3 = cfg.m3_values.front();
  std::mt19937_64 rng(cfg.seed);
  const TopState start = perturbed_state(equilibrium(m3), cfg.perturbation, draw_angles(rng));
  Trajectory traj;
  try {
    traj = integrate(cfg.params, start, cfg.integration);
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnstable;
  }
  return detail::with_output(cfg.output_path, out, err, [&](std::ostream& os) {
    write_trajectory_csv(os, traj);
    return kExitStable;
  });
}

inline int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<SweepRow> rows = run_sweep(cfg);
  return detail::with_output(cfg.output_path, out, err, [&](std::ostream& os) {
    write_sweep_csv(os, rows);
    return kExitStable;
  });
}

}  // namespace lagrange_top::cli
