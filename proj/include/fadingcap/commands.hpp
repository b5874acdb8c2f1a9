// SPDX-License-Identifier: Apache-2.0

#pragma once

// Subcommand bodies of the fadingcap tool, kept in the library so they can be tested without
// spawning a process. Each writes CSV (or a report) to the given stream.

#include <ostream>

#include "fadingcap/scenario.hpp"

namespace fadingcap {

/// sigma*_d on a uniform grid, one column per channel; crossing frequencies in the header.
void cmd_variance(const ScenarioConfig& config, std::ostream& out);

/// Capacity per rho (rows) and channel (columns); theta columns when partial CSI is requested.
void cmd_capacity(const ScenarioConfig& config, CapacityMode mode, std::ostream& out);

/// Long-format table (channel, rho, C_no, C_part, theta, nu) over the whole family.
void cmd_sweep(const ScenarioConfig& config, std::ostream& out);

enum class CheckStatus { Pass, Fail, Insufficient };

struct ValidationOptions {
  /// Multiplies every closed-form reference; 1 for a real run, != 1 to probe sensitivity.
  double reference_scale = 1;
  unsigned workers = 1;
  double z_threshold = 4;
};

/// Monte Carlo versus closed form. Returns the process exit status: 0 when nothing failed.
int cmd_validate(const ScenarioConfig& config, std::ostream& out, const ValidationOptions& options = {});

}  // namespace fadingcap
