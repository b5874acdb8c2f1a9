// SPDX-License-Identifier: Apache-2.0

#include "fadingcap/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fadingcap/errors.hpp"

namespace fadingcap {

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& field, const std::string& what) {
  std::ostringstream msg;
  msg << "config";
  if (node.IsDefined() && node.Mark().line >= 0) msg << " line " << node.Mark().line + 1;
  msg << ", field '" << field << "': " << what;
  throw UsageError(msg.str());
}

template <typename T>
T read(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, field, "cannot convert value '" + (node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")) + "'");
  }
}

double read_positive(const YAML::Node& node, const std::string& field) {
  const double v = read<double>(node, field);
  if (!(v > 0) || !std::isfinite(v)) fail_at(node, field, "must be positive");
  return v;
}

ChannelSpec read_channel(const YAML::Node& node, std::size_t index) {
  const std::string field = "channels[" + std::to_string(index) + "]";
  if (node.IsScalar()) {
    if (node.Scalar() == "uncorrelated") return ChannelSpec::uncorrelated();
    fail_at(node, field, "expected 'uncorrelated' or an 'ou' mapping");
  }
  if (!node.IsMap()) fail_at(node, field, "expected a mapping");
  if (node["uncorrelated"]) return ChannelSpec::uncorrelated();
  const YAML::Node ou = node["ou"];
  if (!ou || !ou.IsMap()) fail_at(node, field, "expected 'ou: {d: ...}' or 'ou: {a: ..., b: ...}'");
  if (ou["d"]) {
    if (ou["a"] || ou["b"]) fail_at(ou, field + ".ou", "give either d or (a, b), not both");
    return ChannelSpec::ou(read_positive(ou["d"], field + ".ou.d"));
  }
  if (!ou["a"] || !ou["b"]) fail_at(ou, field + ".ou", "needs d or both a and b");
  const double a = read<double>(ou["a"], field + ".ou.a");
  if (!(a >= 0)) fail_at(ou["a"], field + ".ou.a", "must be nonnegative");
  return ChannelSpec::ou(a, read_positive(ou["b"], field + ".ou.b"));
}

RhoGrid read_rho(const YAML::Node& node, const std::string& field) {
  RhoGrid grid;
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) grid.explicit_values.push_back(read<double>(node[i], field));
    return grid;
  }
  if (node.IsMap()) {
    LogRange r;
    if (!node["min"] || !node["max"] || !node["points"]) fail_at(node, field, "range needs min, max and points");
    r.min = read_positive(node["min"], field + ".min");
    r.max = read_positive(node["max"], field + ".max");
    r.points = read<int>(node["points"], field + ".points");
    grid.range = r;
    return grid;
  }
  if (node.IsScalar()) return RhoGrid::parse(node.Scalar());
  fail_at(node, field, "expected a list, a {min, max, points} mapping or 'min:max:points'");
}

std::vector<double> split_numbers(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + item + "'");
    }
  }
  return out;
}

}  // namespace

ChannelSpec ChannelSpec::ou(double d) {
  if (!(d > 0)) throw UsageError("channel: d must be positive");
  return {VarianceKind::OrnsteinUhlenbeck, d / 2, d / 2, true};
}

ChannelSpec ChannelSpec::ou(double a, double b) {
  if (!(a >= 0) || !(b > 0)) throw UsageError("channel: need a >= 0 and b > 0");
  return {VarianceKind::OrnsteinUhlenbeck, a, b, false};
}

ChannelSpec ChannelSpec::uncorrelated() { return {VarianceKind::UncorrelatedScattering, 0, 0, false}; }

std::string ChannelSpec::label() const {
  if (kind == VarianceKind::UncorrelatedScattering) return "us";
  std::ostringstream s;
  s << "d=" << d();
  return s.str();
}

SpectralVariance ChannelSpec::variance(double bandwidth) const {
  if (kind == VarianceKind::UncorrelatedScattering) return SpectralVariance::uncorrelated(bandwidth);
  return SpectralVariance::ornstein_uhlenbeck(d(), bandwidth);
}

OuKernel ChannelSpec::kernel(double bandwidth) const {
  if (kind != VarianceKind::OrnsteinUhlenbeck) throw UsageError("channel '" + label() + "' has no time-domain kernel");
  return OuKernel::normalized(a, b, bandwidth);
}

std::vector<double> LogRange::values() const {
  std::vector<double> out;
  if (points == 1) return {min};
  const double lo = std::log10(min), hi = std::log10(max);
  for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, lo + (hi - lo) * i / (points - 1)));
  return out;
}

std::vector<double> RhoGrid::values() const { return range ? range->values() : explicit_values; }

RhoGrid RhoGrid::parse(const std::string& text) {
  RhoGrid grid;
  if (text.find(':') != std::string::npos) {
    const auto parts = split_numbers(text, ':', "rho range");
    if (parts.size() != 3) throw UsageError("rho range: expected min:max:points");
    if (!(parts[0] > 0) || !(parts[1] >= parts[0])) throw UsageError("rho range: need 0 < min <= max");
    if (parts[2] < 1 || parts[2] != std::floor(parts[2])) throw UsageError("rho range: points must be a positive integer");
    grid.range = LogRange{parts[0], parts[1], int(parts[2])};
  } else {
    grid.explicit_values = split_numbers(text, ',', "rho list");
  }
  return grid;
}

CapacityMode parse_mode(const std::string& text) {
  if (text == "no-csi") return CapacityMode::NoCsi;
  if (text == "partial-csi") return CapacityMode::PartialCsi;
  if (text == "both") return CapacityMode::Both;
  throw UsageError("mode: expected no-csi, partial-csi or both, got '" + text + "'");
}

const char* to_string(CapacityMode mode) {
  switch (mode) {
    case CapacityMode::NoCsi: return "no-csi";
    case CapacityMode::PartialCsi: return "partial-csi";
    case CapacityMode::Both: return "both";
  }
  return "?";
}

void ScenarioConfig::validate() const {
  if (channels.empty()) throw UsageError("config: at least one channel is required");
  if (!(bandwidth > 0) || !std::isfinite(bandwidth)) throw UsageError("config: bandwidth must be positive");
  if (rho.range) {
    if (!(rho.range->min > 0) || !(rho.range->max >= rho.range->min) || rho.range->points < 1)
      throw UsageError("config: rho range needs 0 < min <= max and points >= 1");
  }
  const auto values = rho.values();
  if (values.empty()) throw UsageError("config: rho grid is empty");
  for (double r : values)
    if (!(r >= 0) || !std::isfinite(r)) throw UsageError("config: rho values must be nonnegative");
  if (grid_size < 2) throw UsageError("config: grid_size must be at least 2");
  for (const auto& c : channels) {
    if (c.kind == VarianceKind::OrnsteinUhlenbeck && (!(c.a >= 0) || !(c.b > 0)))
      throw UsageError("config: channel " + c.label() + " needs a >= 0 and b > 0");
  }
  if (mc) {
    if (mc->n < 2) throw UsageError("config: mc.n must be at least 2");
    if (mc->m < 256) throw UsageError("config: mc.M must be at least 256");
    if (mc->horizon < 0) throw UsageError("config: mc.T must be nonnegative");
    if (mc->rho.empty()) throw UsageError("config: mc.rho is empty");
    for (double r : mc->rho)
      if (!(r >= 0)) throw UsageError("config: mc.rho values must be nonnegative");
    if (!(mc->precision > 0)) throw UsageError("config: mc.precision must be positive");
  }
}

ScenarioConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw UsageError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ScenarioConfig cfg;
  if (!root || root.IsNull()) return cfg;
  if (!root.IsMap()) throw UsageError("config: top level must be a mapping");

  static const char* known[] = {"bandwidth", "channels", "rho", "grid_size", "mode", "mc"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      fail_at(kv.first, key, "unknown field");
  }

  if (root["bandwidth"]) cfg.bandwidth = read_positive(root["bandwidth"], "bandwidth");
  if (const auto ch = root["channels"]) {
    if (!ch.IsSequence() || ch.size() == 0) fail_at(ch, "channels", "expected a nonempty list");
    cfg.channels.clear();
    for (std::size_t i = 0; i < ch.size(); ++i) cfg.channels.push_back(read_channel(ch[i], i));
  }
  if (root["rho"]) cfg.rho = read_rho(root["rho"], "rho");
  if (root["grid_size"]) {
    const auto n = read<long>(root["grid_size"], "grid_size");
    if (n < 2) fail_at(root["grid_size"], "grid_size", "must be at least 2");
    cfg.grid_size = n;
  }
  if (root["mode"]) {
    try {
      cfg.mode = parse_mode(read<std::string>(root["mode"], "mode"));
    } catch (const UsageError& e) {
      fail_at(root["mode"], "mode", e.what());
    }
  }
  if (const auto mc = root["mc"]) {
    if (!mc.IsMap()) fail_at(mc, "mc", "expected a mapping");
    McConfig m;
    if (mc["n"]) m.n = read<std::size_t>(mc["n"], "mc.n");
    if (mc["seed"]) m.seed = read<std::uint64_t>(mc["seed"], "mc.seed");
    if (mc["M"]) m.m = read<long>(mc["M"], "mc.M");
    if (mc["T"]) m.horizon = read<double>(mc["T"], "mc.T");
    if (mc["rho"]) m.rho = read_rho(mc["rho"], "mc.rho").values();
    if (mc["precision"]) m.precision = read_positive(mc["precision"], "mc.precision");
    cfg.mc = m;
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "bandwidth" << YAML::Value << cfg.bandwidth;
  out << YAML::Key << "channels" << YAML::Value << YAML::BeginSeq;
  for (const auto& c : cfg.channels) {
    if (c.kind == VarianceKind::UncorrelatedScattering) {
      out << "uncorrelated";
      continue;
    }
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "ou" << YAML::Value << YAML::Flow << YAML::BeginMap;
    if (c.from_d)
      out << YAML::Key << "d" << YAML::Value << c.d();
    else
      out << YAML::Key << "a" << YAML::Value << c.a << YAML::Key << "b" << YAML::Value << c.b;
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "rho" << YAML::Value;
  if (cfg.rho.range) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "min" << YAML::Value << cfg.rho.range->min << YAML::Key
        << "max" << YAML::Value << cfg.rho.range->max << YAML::Key << "points" << YAML::Value << cfg.rho.range->points
        << YAML::EndMap;
  } else {
    out << YAML::Flow << cfg.rho.explicit_values;
  }
  out << YAML::Key << "grid_size" << YAML::Value << long(cfg.grid_size);
  out << YAML::Key << "mode" << YAML::Value << to_string(cfg.mode);
  if (cfg.mc) {
    out << YAML::Key << "mc" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n" << YAML::Value << cfg.mc->n;
    out << YAML::Key << "seed" << YAML::Value << cfg.mc->seed;
    out << YAML::Key << "M" << YAML::Value << long(cfg.mc->m);
    out << YAML::Key << "T" << YAML::Value << cfg.mc->horizon;
    out << YAML::Key << "rho" << YAML::Value << YAML::Flow << cfg.mc->rho;
    out << YAML::Key << "precision" << YAML::Value << cfg.mc->precision;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<ChannelSpec> parse_d_list(const std::string& text) {
  std::vector<ChannelSpec> out;
  for (double d : split_numbers(text, ',', "d list")) out.push_back(ChannelSpec::ou(d));
  if (out.empty()) throw UsageError("d list is empty");
  return out;
}

}  // namespace fadingcap
