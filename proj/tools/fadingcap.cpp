// SPDX-License-Identifier: Apache-2.0

// fadingcap: average capacity of correlated-scattering Rayleigh channels.
//
//   fadingcap variance --d 1,2,5 --grid 512
//   fadingcap capacity --d 1,5 --rho 0.01:1000:25 --mode both --out cap.csv
//   fadingcap sweep --config family.yaml
//   fadingcap validate --config mc.yaml --seed 7
//   fadingcap --config family.yaml --dump-config

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "fadingcap/commands.hpp"
#include "fadingcap/errors.hpp"
#include "fadingcap/scenario.hpp"

int main(int argc, char** argv) {
  using namespace fadingcap;

  CLI::App app{"Average capacity of frequency-selective Rayleigh fading channels with correlated scattering"};
  app.fallthrough();

  std::string config_path, d_list, rho_spec, mode_text, out_path;
  std::uint64_t seed = 0;
  std::size_t mc_n = 0;
  long grid = 0;
  double bandwidth = 0;
  bool dump = false;
  app.add_option("--config", config_path, "YAML scenario file")->check(CLI::ExistingFile);
  app.add_option("--d", d_list, "comma-separated OU decay parameters d = a + b (replaces the channel list)");
  app.add_option("--rho", rho_spec, "SNR grid: min:max:points (log-spaced) or a comma-separated list");
  app.add_option("--mode", mode_text, "no-csi | partial-csi | both");
  app.add_option("--out", out_path, "output file (default: standard output)");
  app.add_option("--seed", seed, "Monte Carlo seed");
  app.add_option("--n", mc_n, "Monte Carlo realizations");
  app.add_option("--grid", grid, "grid size for sampled functions");
  app.add_option("--W", bandwidth, "bandwidth W");
  app.add_flag("--dump-config", dump, "print the effective configuration as YAML and exit");

  auto* variance = app.add_subcommand("variance", "decreasing rearrangements of the spectral variances (CSV)");
  auto* capacity = app.add_subcommand("capacity", "average capacity versus SNR (CSV)");
  auto* sweep = app.add_subcommand("sweep", "long-format capacity sweep over the channel family (CSV)");
  auto* validate = app.add_subcommand("validate", "Monte Carlo check of the closed forms");
  double corrupt = 1;
  validate->add_option("--reference-scale", corrupt, "scale the closed-form references (sensitivity probe)");
  app.require_subcommand(0, 1);

  CLI11_PARSE(app, argc, argv);

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
    if (!d_list.empty()) cfg.channels = parse_d_list(d_list);
    if (!rho_spec.empty()) cfg.rho = RhoGrid::parse(rho_spec);
    if (!mode_text.empty()) cfg.mode = parse_mode(mode_text);
    if (grid > 0) cfg.grid_size = grid;
    if (bandwidth > 0) cfg.bandwidth = bandwidth;
    if (validate->parsed() && !cfg.mc) cfg.mc = McConfig{};
    if (cfg.mc) {
      if (app.count("--seed")) cfg.mc->seed = seed;
      if (mc_n > 0) cfg.mc->n = mc_n;
    }
    cfg.validate();

    std::unique_ptr<std::ofstream> file;
    if (!out_path.empty()) {
      file = std::make_unique<std::ofstream>(out_path);
      if (!*file) throw UsageError("cannot open output file '" + out_path + "'");
    }
    std::ostream& out = file ? *file : std::cout;

    if (dump) {
      out << dump_config(cfg);
      return 0;
    }
    if (variance->parsed()) {
      cmd_variance(cfg, out);
    } else if (capacity->parsed()) {
      cmd_capacity(cfg, cfg.mode, out);
    } else if (sweep->parsed()) {
      cmd_sweep(cfg, out);
    } else if (validate->parsed()) {
      ValidationOptions options;
      options.reference_scale = corrupt;
      return cmd_validate(cfg, out, options);
    } else {
      std::cerr << app.help();
      return 2;
    }
  } catch (const UsageError& e) {
    std::cerr << "fadingcap: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fadingcap: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
