// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "noma/experiments.hpp"

namespace noma::experiments {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + t + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const long long v = parse_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": integer out of range");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + t + "'");
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

std::string format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::kCsv: return "csv";
    case OutputFormat::kJson: return "json";
    case OutputFormat::kBoth: return "both";
  }
  return "both";
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    channel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("channel: ") + e.what());
  }
  if (alpha_grid.empty()) throw ConfigError("alpha_grid must not be empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha_grid values must lie in [0, 1]");
  }
  if (tx_snr_db.empty()) throw ConfigError("tx_snr_db must not be empty");
  for (double d : weakest_distances) {
    if (!(d > 0.0)) throw ConfigError("weakest_distances must be > 0");
  }
  if (num_trials < 1) throw ConfigError("num_trials must be >= 1");
  if (!(threshold > 0.0)) throw ConfigError("sca.threshold must be > 0");
  if (max_iterations < 1) throw ConfigError("sca.max_iterations must be >= 1");
  if (!(solver_tolerance > 0.0 && solver_tolerance < 1.0)) throw ConfigError("solver.tolerance must be in (0, 1)");
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
}

sca::ScaSettings ExperimentConfig::sca_settings() const {
  sca::ScaSettings s;
  s.threshold = threshold;
  s.stop_rule = stop_rule;
  s.signal_gradient = signal_gradient;
  s.signal_phase = signal_phase;
  s.max_iterations = max_iterations;
  s.solver.tolerance = solver_tolerance;
  return s;
}

double ExperimentConfig::power_budget(double snr_db) const {
  return channel.noise_variances.front() * std::pow(10.0, snr_db / 10.0);
}

ExperimentConfig alpha_sweep_preset() {
  ExperimentConfig cfg;
  cfg.output_path = "alpha_sweep";
  return cfg;
}

ExperimentConfig power_sweep_preset() {
  ExperimentConfig cfg;
  cfg.tx_snr_db = {10.0, 15.0, 20.0, 25.0, 30.0, 35.0};
  cfg.alpha_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  cfg.output_path = "power_sweep";
  return cfg;
}

ExperimentConfig pareto_preset() {
  ExperimentConfig cfg;
  cfg.tx_snr_db = {15.0, 25.0};
  cfg.output_path = "pareto";
  return cfg;
}

ExperimentConfig distance_table_preset() {
  ExperimentConfig cfg;
  cfg.tx_snr_db = {35.0};
  cfg.alpha_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  cfg.weakest_distances = {10.0, 100.0, 1000.0};
  cfg.output_path = "distance_table";
  return cfg;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"channel.num_antennas",
       [](ExperimentConfig& c, const std::string& v) { c.channel.num_antennas = parse_int("channel.num_antennas", v); }},
      {"channel.num_users",
       [](ExperimentConfig& c, const std::string& v) { c.channel.num_users = parse_int("channel.num_users", v); }},
      {"channel.distances",
       [](ExperimentConfig& c, const std::string& v) { c.channel.distances = parse_list("channel.distances", v); }},
      {"channel.path_loss_exponent",
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.path_loss_exponent = parse_double("channel.path_loss_exponent", v);
       }},
      {"channel.noise_variances",
       [](ExperimentConfig& c, const std::string& v) {
         c.channel.noise_variances = parse_list("channel.noise_variances", v);
       }},
      {"channel.seed",
       [](ExperimentConfig& c, const std::string& v) {
         const long long s = parse_integer("channel.seed", v);
         if (s < 0) throw ConfigError("channel.seed must be >= 0");
         c.channel.seed = static_cast<std::uint64_t>(s);
       }},
      {"tx_snr_db", [](ExperimentConfig& c, const std::string& v) { c.tx_snr_db = parse_list("tx_snr_db", v); }},
      {"alpha_grid", [](ExperimentConfig& c, const std::string& v) { c.alpha_grid = parse_list("alpha_grid", v); }},
      {"weakest_distances",
       [](ExperimentConfig& c, const std::string& v) {
         c.weakest_distances = trim(v).empty() ? std::vector<double>{} : parse_list("weakest_distances", v);
       }},
      {"num_trials", [](ExperimentConfig& c, const std::string& v) { c.num_trials = parse_int("num_trials", v); }},
      {"sca.threshold", [](ExperimentConfig& c, const std::string& v) { c.threshold = parse_double("sca.threshold", v); }},
      {"sca.stop_rule",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string r = trim(v);
         if (r == "relative") {
           c.stop_rule = sca::StopRule::kRelative;
         } else if (r == "absolute") {
           c.stop_rule = sca::StopRule::kAbsolute;
         } else {
           throw ConfigError("sca.stop_rule: expected relative or absolute, got '" + r + "'");
         }
       }},
      {"sca.signal_gradient",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string g = trim(v);
         if (g == "taylor") {
           c.signal_gradient = sca::SignalGradient::kTaylor;
         } else if (g == "unit_interference") {
           c.signal_gradient = sca::SignalGradient::kUnitInterference;
         } else {
           throw ConfigError("sca.signal_gradient: expected taylor or unit_interference, got '" + g + "'");
         }
       }},
      {"sca.signal_phase",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string ph = trim(v);
         if (ph == "common") {
           c.signal_phase = sca::SignalPhase::kCommon;
         } else if (ph == "per_decoder") {
           c.signal_phase = sca::SignalPhase::kPerDecoder;
         } else {
           throw ConfigError("sca.signal_phase: expected common or per_decoder, got '" + ph + "'");
         }
       }},
      {"sca.max_iterations",
       [](ExperimentConfig& c, const std::string& v) { c.max_iterations = parse_int("sca.max_iterations", v); }},
      {"solver.tolerance",
       [](ExperimentConfig& c, const std::string& v) { c.solver_tolerance = parse_double("solver.tolerance", v); }},
      {"bandwidth_hz", [](ExperimentConfig& c, const std::string& v) { c.bandwidth_hz = parse_double("bandwidth_hz", v); }},
      {"workers", [](ExperimentConfig& c, const std::string& v) { c.workers = parse_int("workers", v); }},
      {"output.path", [](ExperimentConfig& c, const std::string& v) { c.output_path = trim(v); }},
      {"output.format",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string f = trim(v);
         if (f == "csv") {
           c.output_format = OutputFormat::kCsv;
         } else if (f == "json") {
           c.output_format = OutputFormat::kJson;
         } else if (f == "both") {
           c.output_format = OutputFormat::kBoth;
         } else {
           throw ConfigError("output.format: expected csv, json or both, got '" + f + "'");
         }
       }},
      {"output.dump_solutions",
       [](ExperimentConfig& c, const std::string& v) { c.dump_solutions = parse_bool("output.dump_solutions", v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown key '" + key + "'");
  it->second(cfg, value);
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    apply_config_text(cfg, buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "channel.num_antennas = " << cfg.channel.num_antennas << "\n"
     << "channel.num_users = " << cfg.channel.num_users << "\n"
     << "channel.distances = " << join(cfg.channel.distances) << "\n"
     << "channel.path_loss_exponent = " << cfg.channel.path_loss_exponent << "\n"
     << "channel.noise_variances = " << join(cfg.channel.noise_variances) << "\n"
     << "channel.seed = " << cfg.channel.seed << "\n"
     << "tx_snr_db = " << join(cfg.tx_snr_db) << "\n"
     << "alpha_grid = " << join(cfg.alpha_grid) << "\n"
     << "weakest_distances = " << join(cfg.weakest_distances) << "\n"
     << "num_trials = " << cfg.num_trials << "\n"
     << "sca.threshold = " << cfg.threshold << "\n"
     << "sca.stop_rule = " << (cfg.stop_rule == sca::StopRule::kRelative ? "relative" : "absolute") << "\n"
     << "sca.signal_gradient = "
     << (cfg.signal_gradient == sca::SignalGradient::kTaylor ? "taylor" : "unit_interference") << "\n"
     << "sca.signal_phase = " << (cfg.signal_phase == sca::SignalPhase::kCommon ? "common" : "per_decoder") << "\n"
     << "sca.max_iterations = " << cfg.max_iterations << "\n"
     << "solver.tolerance = " << cfg.solver_tolerance << "\n"
     << "bandwidth_hz = " << cfg.bandwidth_hz << "\n"
     << "workers = " << cfg.workers << "\n"
     << "output.path = " << cfg.output_path << "\n"
     << "output.format = " << format_name(cfg.output_format) << "\n"
     << "output.dump_solutions = " << (cfg.dump_solutions ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace noma::experiments
