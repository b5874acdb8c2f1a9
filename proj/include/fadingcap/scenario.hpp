// SPDX-License-Identifier: Apache-2.0

#pragma once

// Scenario configuration shared by the command-line subcommands. Files are YAML:
//
//   bandwidth: 1
//   channels:
//     - ou: {d: 1}
//     - ou: {a: 0.5, b: 4.5}
//     - uncorrelated
//   rho: {min: 0.01, max: 1000, points: 25}   # log-spaced; or rho: [0.1, 1, 10]
//   grid_size: 512
//   mode: both                                # no-csi | partial-csi | both
//   mc: {n: 100000, seed: 1, M: 1024, T: 0, rho: [0.1, 10]}   # T = 0 selects 20 / b

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fadingcap/channel.hpp"

namespace fadingcap {

struct ChannelSpec {
  VarianceKind kind = VarianceKind::OrnsteinUhlenbeck;
  double a = 0.5;  // OU only
  double b = 0.5;
  bool from_d = true;  // written back as {d: ...} rather than {a, b}

  static ChannelSpec ou(double d);
  static ChannelSpec ou(double a, double b);
  static ChannelSpec uncorrelated();

  double d() const { return a + b; }
  std::string label() const;
  SpectralVariance variance(double bandwidth) const;
  OuKernel kernel(double bandwidth) const;

  bool operator==(const ChannelSpec&) const = default;
};

struct LogRange {
  double min = 1e-2;
  double max = 1e3;
  int points = 25;

  std::vector<double> values() const;
  bool operator==(const LogRange&) const = default;
};

struct RhoGrid {
  std::optional<LogRange> range;
  std::vector<double> explicit_values;

  std::vector<double> values() const;
  /// "min:max:points" (log-spaced) or a comma-separated list.
  static RhoGrid parse(const std::string& text);
  bool operator==(const RhoGrid&) const = default;
};

enum class CapacityMode { NoCsi, PartialCsi, Both };

CapacityMode parse_mode(const std::string& text);
const char* to_string(CapacityMode mode);

struct McConfig {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  Eigen::Index m = 1024;
  double horizon = 0;  // 0: 20 / b per channel
  std::vector<double> rho{0.1, 10};
  double precision = 0.05;  // a check needs 4 SE below this fraction of the reference

  bool operator==(const McConfig&) const = default;
};

struct ScenarioConfig {
  std::vector<ChannelSpec> channels{ChannelSpec::ou(1), ChannelSpec::ou(5)};
  double bandwidth = 1;
  RhoGrid rho{LogRange{}, {}};
  Eigen::Index grid_size = 512;
  CapacityMode mode = CapacityMode::Both;
  std::optional<McConfig> mc;

  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_config(const std::string& yaml_text);
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& config);

/// d list "1,2,5" as OU channels.
std::vector<ChannelSpec> parse_d_list(const std::string& text);

}  // namespace fadingcap
