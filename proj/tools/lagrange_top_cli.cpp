// lagrange_top: stability of the sleeping heavy symmetric top.
//
//   lagrange_top classify --m3 3
//   lagrange_top sweep --m3 1.6:2.4:0.2 --out sweep.csv
//   lagrange_top witness --m3 1 --gamma3 0.9 --gamma3 0.99
//   lagrange_top simulate --config run.cfg --out traj.csv
//   lagrange_top certify --m3 2

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "lagrange_top/commands.hpp"
#include "lagrange_top/experiment.hpp"

namespace {

using lagrange_top::ExperimentConfig;
namespace cli = lagrange_top::cli;

struct SharedFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::optional<std::string>>> settings{
      {"A", {}},     {"C", {}},       {"m", {}},           {"g", {}},
      {"z", {}},     {"step", {}},    {"n_steps", {}},     {"record_every", {}},
      {"perturbation", {}}, {"seed", {}}, {"output", {}}};
  std::vector<std::string> m3_specs;
  bool project_gamma = false;
};

std::string flag_name(const std::string& key) {
  if (key == "n_steps") return "--n-steps";
  if (key == "record_every") return "--record-every";
  if (key == "output") return "--out";
  return "--" + key;
}

void add_shared_flags(CLI::App& sub, SharedFlags& flags) {
  sub.add_option("--config", flags.config_path, "flat key = value config file")
      ->check(CLI::ExistingFile);
  for (auto& [key, value] : flags.settings) {
    sub.add_option(flag_name(key), value, "overrides config key '" + key + "'");
  }
  sub.add_option("--m3", flags.m3_specs, "spin M3 (repeatable, or range a:b:step)");
  sub.add_flag("--project-gamma", flags.project_gamma, "renormalize gamma after each step");
}

ExperimentConfig build_config(const SharedFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw std::invalid_argument("cannot read config '" + flags.config_path + "'");
    for (const auto& [key, value] : lagrange_top::parse_config_text(in)) {
      lagrange_top::apply_setting(cfg, key, value);
    }
  }
  for (const auto& [key, value] : flags.settings) {
    if (value) lagrange_top::apply_setting(cfg, key, *value);
  }
  if (!flags.m3_specs.empty()) {
    cfg.m3_values.clear();
    for (const std::string& spec : flags.m3_specs) {
      for (double m3 : lagrange_top::parse_m3_spec(spec)) cfg.m3_values.push_back(m3);
    }
  }
  if (flags.project_gamma) cfg.integration.project_gamma = true;
  if (cfg.params.violates_triangle_inequality()) {
    std::cerr << "warning: C > 2A violates the triangle inequality for moments of inertia\n";
  }
  lagrange_top::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability of vertical uniform rotations of the heavy symmetric top"};
  app.require_subcommand(1);

  SharedFlags flags;
  std::vector<double> gamma3_values;

  auto* classify = app.add_subcommand("classify", "closed-form, spectral and isolation verdicts");
  auto* certify = app.add_subcommand("certify", "isolation verdict only");
  auto* witness = app.add_subcommand("witness", "explicit level-set solutions near the equilibrium");
  auto* simulate = app.add_subcommand("simulate", "integrate one perturbed run to CSV");
  auto* sweep = app.add_subcommand("sweep", "classify and integrate over a list of m3 values");
  for (CLI::App* sub : {classify, certify, witness, simulate, sweep}) add_shared_flags(*sub, flags);
  witness->add_option("--gamma3", gamma3_values, "gamma3 values in (gamma3_min, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInputError;
  }

  try {
    const ExperimentConfig cfg = build_config(flags);
    if (classify->parsed()) return cli::cmd_classify(cfg.params, cfg.m3_values, std::cout);
    if (certify->parsed()) return cli::cmd_certify(cfg.params, cfg.m3_values, std::cout);
    if (witness->parsed()) {
      if (gamma3_values.empty()) gamma3_values = {0.9, 0.99, 0.999};
      return cli::cmd_witness(cfg.params, cfg.m3_values.front(), gamma3_values, std::cout,
                              std::cerr);
    }
    if (simulate->parsed()) return cli::cmd_simulate(cfg, std::cout, std::cerr);
    if (sweep->parsed()) return cli::cmd_sweep(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitInputError;
  }
  return cli::kExitInputError;
}
