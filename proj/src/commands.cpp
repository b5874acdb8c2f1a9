// SPDX-License-Identifier: Apache-2.0

#include "fadingcap/commands.hpp"

#include <algorithm>
#include <future>
#include <thread>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "fadingcap/capacity.hpp"
#include "fadingcap/mc_oracle.hpp"

namespace fadingcap {

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) { out_ << std::setprecision(12); }

  void comment(const std::string& text) {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) out_ << "# " << line << '\n';
  }

  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) out_ << (i ? "," : "") << names[i];
    out_ << '\n';
  }

  std::ostream& stream() { return out_; }

 private:
  std::ostream& out_;
};

/// Evaluate fn(i) for i in [0, n), a few at a time; results come back in index order.
template <typename Fn>
auto evaluate_all(std::size_t n, Fn fn) {
  using Result = decltype(fn(std::size_t{0}));
  const std::size_t wave = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Result> out;
  out.reserve(n);
  for (std::size_t start = 0; start < n; start += wave) {
    std::vector<std::future<Result>> pending;
    for (std::size_t i = start; i < std::min(n, start + wave); ++i)
      pending.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : pending) out.push_back(f.get());
  }
  return out;
}

struct PointResult {
  double c_no = 0;
  double c_part = 0;
  double theta = 0;
  double nu = 0;
};

PointResult evaluate_point(const SpectralVariance& sigma, double rho, double bandwidth, CapacityMode mode) {
  PointResult r;
  const SnrScenario scen{rho, bandwidth};
  if (mode != CapacityMode::PartialCsi) r.c_no = capacity_no_csi(sigma, scen).value;
  if (mode != CapacityMode::NoCsi) {
    const auto sol = waterfill(sigma, scen);
    r.c_part = sol.capacity;
    r.theta = sol.theta;
    r.nu = sol.nu;
  }
  return r;
}

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Insufficient: return "INSUFFICIENT";
  }
  return "?";
}

}  // namespace

void cmd_variance(const ScenarioConfig& config, std::ostream& out) {
  config.validate();
  CsvWriter csv(out);
  csv.comment("fadingcap variance\n" + dump_config(config));
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    for (std::size_t j = 0; j < config.channels.size(); ++j) {
      const auto& c1 = config.channels[i];
      const auto& c2 = config.channels[j];
      if (c1.kind != VarianceKind::OrnsteinUhlenbeck || c2.kind != VarianceKind::OrnsteinUhlenbeck) continue;
      if (!(c1.d() < c2.d())) continue;
      std::ostringstream line;
      line << std::setprecision(12) << "crossing " << c1.label() << " " << c2.label() << " f="
           << crossing_frequency(c1.d(), c2.d(), config.bandwidth);
      csv.comment(line.str());
    }
  }

  std::vector<std::string> names{"f"};
  std::vector<SpectralVariance> sigmas;
  for (const auto& c : config.channels) {
    names.push_back("sigma_star_" + c.label());
    sigmas.push_back(c.variance(config.bandwidth));
  }
  csv.header(names);
  const auto n = config.grid_size;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = SampledFunction<double>::midpoint(i, n);
    std::vector<double> row{f};
    for (const auto& s : sigmas) row.push_back(s.rearranged(f));
    csv.row(row);
  }
}

void cmd_capacity(const ScenarioConfig& config, CapacityMode mode, std::ostream& out) {
  config.validate();
  CsvWriter csv(out);
  csv.comment("fadingcap capacity mode=" + std::string(to_string(mode)) + "\n" + dump_config(config));

  std::vector<std::string> names{"rho"};
  std::vector<SpectralVariance> sigmas;
  for (const auto& c : config.channels) sigmas.push_back(c.variance(config.bandwidth));
  if (mode != CapacityMode::PartialCsi)
    for (const auto& c : config.channels) names.push_back("c_no_" + c.label());
  if (mode != CapacityMode::NoCsi) {
    for (const auto& c : config.channels) names.push_back("c_part_" + c.label());
    for (const auto& c : config.channels) names.push_back("theta_" + c.label());
  }
  csv.header(names);

  const auto rhos = config.rho.values();
  const auto rows = evaluate_all(rhos.size(), [&](std::size_t i) {
    std::vector<PointResult> r;
    for (const auto& s : sigmas) r.push_back(evaluate_point(s, rhos[i], config.bandwidth, mode));
    return r;
  });
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    std::vector<double> row{rhos[i]};
    if (mode != CapacityMode::PartialCsi)
      for (const auto& p : rows[i]) row.push_back(p.c_no);
    if (mode != CapacityMode::NoCsi) {
      for (const auto& p : rows[i]) row.push_back(p.c_part);
      for (const auto& p : rows[i]) row.push_back(p.theta);
    }
    csv.row(row);
  }
}

void cmd_sweep(const ScenarioConfig& config, std::ostream& out) {
  config.validate();
  CsvWriter csv(out);
  csv.comment("fadingcap sweep\n" + dump_config(config));
  csv.header({"channel", "d", "rho", "c_no", "c_part", "theta", "nu"});

  const auto rhos = config.rho.values();
  const std::size_t per_channel = rhos.size();
  const auto points = evaluate_all(config.channels.size() * per_channel, [&](std::size_t k) {
    const auto& c = config.channels[k / per_channel];
    return evaluate_point(c.variance(config.bandwidth), rhos[k % per_channel], config.bandwidth, CapacityMode::Both);
  });
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& c = config.channels[k / per_channel];
    const double d = c.kind == VarianceKind::OrnsteinUhlenbeck ? c.d() : 0.0;
    csv.stream() << c.label() << ',';
    csv.row({d, rhos[k % per_channel], points[k].c_no, points[k].c_part, points[k].theta, points[k].nu});
  }
}

int cmd_validate(const ScenarioConfig& config, std::ostream& out, const ValidationOptions& options) {
  config.validate();
  if (!config.mc) throw UsageError("validate: the configuration has no 'mc' section");
  const McConfig& mc = *config.mc;
  const double w = config.bandwidth;
  out << std::setprecision(6);
  out << "# fadingcap validate n=" << mc.n << " M=" << mc.m << " seed=" << mc.seed << " z<=" << options.z_threshold
      << "\n";

  int checks = 0, failures = 0, insufficient = 0;
  auto judge = [&](const std::string& name, const McEstimate& e, double reference) {
    reference *= options.reference_scale;
    const double z = e.z_score(reference);
    CheckStatus status;
    if (options.z_threshold * e.std_error > mc.precision * std::abs(reference))
      status = CheckStatus::Insufficient;
    else
      status = std::abs(z) <= options.z_threshold ? CheckStatus::Pass : CheckStatus::Fail;
    ++checks;
    if (status == CheckStatus::Fail) ++failures;
    if (status == CheckStatus::Insufficient) ++insufficient;
    out << status_name(status) << ' ' << name << " mc=" << e.value << " ref=" << reference << " se=" << e.std_error
        << " z=" << z << '\n';
  };

  constexpr int kSpectrumPoints = 16;
  for (const auto& channel : config.channels) {
    if (channel.kind != VarianceKind::OrnsteinUhlenbeck) {
      out << "SKIP " << channel.label() << ": no time-domain kernel to sample\n";
      continue;
    }
    const SpectralVariance sigma = channel.variance(w);
    const ChannelSampler sampler(channel.kernel(w), mc.m, mc.horizon, mc.seed);

    std::vector<double> freqs;
    for (int k = 0; k < kSpectrumPoints; ++k) freqs.push_back(w * ((k + 0.5) / kSpectrumPoints - 0.5));
    std::vector<CapacityQuery> queries;
    std::vector<double> references;
    std::vector<std::string> names;
    for (double rho : mc.rho) {
      const SnrScenario scen{rho, w};
      queries.push_back({PowerAllocation::uniform(w), scen});
      references.push_back(capacity_no_csi(sigma, scen).value);
      names.push_back("capacity no-csi " + channel.label() + " rho=" + std::to_string(rho));
      if (rho > 0) {
        const auto sol = waterfill(sigma, scen);
        queries.push_back({sol.original_allocation(), scen});
        references.push_back(sol.capacity);
        names.push_back("capacity partial-csi " + channel.label() + " rho=" + std::to_string(rho));
      }
    }

    const auto report = run_monte_carlo(sampler, mc.n, freqs, queries, 256, options.workers);
    for (int k = 0; k < kSpectrumPoints; ++k) {
      std::ostringstream name;
      name << "spectrum " << channel.label() << " f=" << freqs[std::size_t(k)];
      judge(name.str(), report.spectrum[std::size_t(k)], spectral_variance_ou(channel.d(), w, freqs[std::size_t(k)]));
    }
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (references[q] == 0 && report.capacity[q].value == 0) {
        ++checks;
        out << "PASS " << names[q] << " mc=0 ref=0 (exact)\n";
        continue;
      }
      judge(names[q], report.capacity[q], references[q]);
    }
  }
  out << "# checks=" << checks << " failed=" << failures << " insufficient=" << insufficient << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace fadingcap
