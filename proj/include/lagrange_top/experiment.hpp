#pragma once

// Experiment configuration, perturbed initial conditions and threshold
// sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lagrange_top/integrator.hpp"
#include "lagrange_top/level_set.hpp"
#include "lagrange_top/linear_stability.hpp"
#include "lagrange_top/top.hpp"

namespace lagrange_top {

struct ExperimentConfig {
  TopParams params{1.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<double> m3_values;
  double perturbation = 1e-4;
  IntegrationConfig integration{};
  std::uint64_t seed = 0;
  std::string output_path;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid number for " + key + ": '" + text + "'");
  }
  if (used != text.size()) {
    throw std::invalid_argument("invalid number for " + key + ": '" + text + "'");
  }
  return x;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("invalid non-negative integer for " + key + ": '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("integer out of range for " + key + ": '" + text + "'");
  }
}

}  // namespace detail

/// Parses an m3 list: a single value, a comma-separated list, or an
/// inclusive range "a:b:step".
inline std::vector<double> parse_m3_spec(const std::string& spec) {
  const std::string text = detail::trim(spec);
  if (text.empty()) throw std::invalid_argument("empty m3 specification");

  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(detail::trim(item));
    if (parts.size() != 3) throw std::invalid_argument("m3 range must be a:b:step, got " + text);
    const double a = detail::parse_real("m3", parts[0]);
    const double b = detail::parse_real("m3", parts[1]);
    const double step = detail::parse_real("m3", parts[2]);
    if (!(step > 0.0) || !(b >= a)) {
      throw std::invalid_argument("m3 range needs step > 0 and b >= a, got " + text);
    }
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(a + static_cast<double>(k) * step);
    return out;
  }

  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    out.push_back(detail::parse_real("m3", detail::trim(item)));
  }
  return out;
}

/// Applies one key = value setting. Physical parameters are revalidated as
/// a set, so the config is left unchanged if the new value is invalid.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto with_param = [&](double A, double C, double m, double g, double z) {
    cfg.params = TopParams(A, C, m, g, z);
  };
  const TopParams& p = cfg.params;
  if (key == "A") {
    with_param(detail::parse_real(key, value), p.C(), p.m(), p.g(), p.z());
  } else if (key == "C") {
    with_param(p.A(), detail::parse_real(key, value), p.m(), p.g(), p.z());
  } else if (key == "m") {
    with_param(p.A(), p.C(), detail::parse_real(key, value), p.g(), p.z());
  } else if (key == "g") {
    with_param(p.A(), p.C(), p.m(), detail::parse_real(key, value), p.z());
  } else if (key == "z") {
    with_param(p.A(), p.C(), p.m(), p.g(), detail::parse_real(key, value));
  } else if (key == "m3") {
    cfg.m3_values = parse_m3_spec(value);
  } else if (key == "step") {
    cfg.integration.step = detail::parse_real(key, value);
  } else if (key == "n_steps") {
    cfg.integration.n_steps = detail::parse_count(key, value);
  } else if (key == "record_every") {
    cfg.integration.record_every = detail::parse_count(key, value);
  } else if (key == "project_gamma") {
    if (value == "true" || value == "1") {
      cfg.integration.project_gamma = true;
    } else if (value == "false" || value == "0") {
      cfg.integration.project_gamma = false;
    } else {
      throw std::invalid_argument("project_gamma must be true/false, got '" + value + "'");
    }
  } else if (key == "perturbation") {
    cfg.perturbation = detail::parse_real(key, value);
  } else if (key == "seed") {
    cfg.seed = detail::parse_count(key, value);
  } else if (key == "output") {
    cfg.output_path = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

/// Reads flat "key = value" lines. Blank lines and lines starting with '#'
/// are ignored.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline void validate(const ExperimentConfig& cfg) {
  cfg.integration.validate();
  if (!(cfg.perturbation >= 0.0) || !std::isfinite(cfg.perturbation)) {
    throw std::invalid_argument("perturbation must be finite and >= 0");
  }
  if (cfg.m3_values.empty()) throw std::invalid_argument("no m3 values given");
  for (double m3 : cfg.m3_values) {
    if (!std::isfinite(m3)) throw std::invalid_argument("m3 values must be finite");
  }
}

/// Transverse kick directions for one run.
struct PerturbationAngles {
  double momentum = 0.0;
  double gamma = 0.0;
};

inline PerturbationAngles draw_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  const double a = dist(rng);
  const double b = dist(rng);
  return {a, b};
}

/// Adds magnitude*(cos, sin) to (M1, M2) and to (gamma1, gamma2), then
/// rescales gamma to unit length.
inline TopState perturbed_state(const TopState& base, double magnitude,
                                const PerturbationAngles& angles) {
  TopState s = base;
  s.M[0] += magnitude * std::cos(angles.momentum);
  s.M[1] += magnitude * std::sin(angles.momentum);
  s.gamma[0] += magnitude * std::cos(angles.gamma);
  s.gamma[1] += magnitude * std::sin(angles.gamma);
  const double n = norm(s.gamma);
  for (double& x : s.gamma) x /= n;
  return s;
}

struct SweepRow {
  double m3 = 0.0;
  double threshold_margin = 0.0;
  SpectralVerdict spectral_verdict = SpectralVerdict::SpectrallyStable;
  double growth_rate_predicted = 0.0;
  double growth_rate_measured = std::nan("");
  double max_deviation = 0.0;
  ConservedSet drift{};
};

inline constexpr const char* kSweepCsvHeader =
    "m3,threshold_margin,spectral_verdict,growth_rate_predicted,growth_rate_measured,"
    "max_deviation,drift_H,drift_C1,drift_C2,drift_F";

inline double max_deviation(const Trajectory& traj, const TopState& eq) {
  double worst = 0.0;
  for (const TopState& s : traj.states) worst = std::max(worst, distance(s, eq));
  return worst;
}

/// Classifies, integrates one perturbed run, and measures deviation and drift.
/// A non-finite state is recorded as max_deviation = inf.
inline SweepRow run_sweep_row(const TopParams& p, double m3, double perturbation,
                              const PerturbationAngles& angles,
                              const IntegrationConfig& integration) {
  SweepRow row;
  row.m3 = m3;
  const SpectralReport spec = classify_spectral(p, m3);
  row.threshold_margin = spec.margin;
  row.spectral_verdict = spec.verdict;
  row.growth_rate_predicted = spec.growth_rate;

  const TopState eq = equilibrium(m3);
  const TopState start = perturbed_state(eq, perturbation, angles);
  try {
    const Trajectory traj = integrate(p, start, integration);
    row.max_deviation = max_deviation(traj, eq);
    row.drift = drift_report(traj);
    if (spec.verdict == SpectralVerdict::SpectrallyUnstable) {
      if (const auto window = growth_fit_window(traj, eq)) {
        row.growth_rate_measured = measured_growth_rate(traj, eq, *window);
      }
    }
  } catch (const IntegrationError&) {
    row.max_deviation = std::numeric_limits<double>::infinity();
    const double nan = std::nan("");
    row.drift = {nan, nan, nan, nan};
  }
  return row;
}

/// One row per m3 value, in ascending m3 order. Perturbation directions are
/// drawn from the seeded generator in that order before any run starts, so
/// the result does not depend on scheduling.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, bool parallel = true) {
  validate(cfg);
  if (!(cfg.perturbation > 0.0)) throw std::invalid_argument("sweep needs perturbation > 0");

  std::vector<double> m3s = cfg.m3_values;
  std::stable_sort(m3s.begin(), m3s.end());

  std::mt19937_64 rng(cfg.seed);
  std::vector<PerturbationAngles> angles;
  angles.reserve(m3s.size());
  for (std::size_t i = 0; i < m3s.size(); ++i) angles.push_back(draw_angles(rng));

  std::vector<std::future<SweepRow>> jobs;
  jobs.reserve(m3s.size());
  for (std::size_t i = 0; i < m3s.size(); ++i) {
    jobs.push_back(std::async(parallel ? std::launch::async : std::launch::deferred,
                              run_sweep_row, std::cref(cfg.params), m3s[i], cfg.perturbation,
                              angles[i], std::cref(cfg.integration)));
  }
  std::vector<SweepRow> rows;
  rows.reserve(m3s.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    os << format_real(r.m3) << ',' << format_real(r.threshold_margin) << ','
       << to_string(r.spectral_verdict) << ',' << format_real(r.growth_rate_predicted) << ','
       << format_real(r.growth_rate_measured) << ',' << format_real(r.max_deviation);
    for (double d : r.drift.as_array()) os << ',' << format_real(d);
    os << '\n';
  }
}

}  // namespace lagrange_top
