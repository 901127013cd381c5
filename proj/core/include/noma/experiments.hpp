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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "noma/channel.hpp"
#include "noma/metrics.hpp"
#include "noma/sca.hpp"

namespace noma::experiments {

/// Malformed configuration text, unknown keys or out-of-range values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { kCsv, kJson, kBoth };

struct ExperimentConfig {
  ChannelConfig channel;
  std::vector<double> tx_snr_db{30.0};
  std::vector<double> alpha_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> weakest_distances;  // distance-table rows; empty elsewhere
  int num_trials = 100;
  double threshold = 1e-3;
  sca::StopRule stop_rule = sca::StopRule::kRelative;
  sca::SignalGradient signal_gradient = sca::SignalGradient::kTaylor;
  sca::SignalPhase signal_phase = sca::SignalPhase::kCommon;
  int max_iterations = 100;
  double solver_tolerance = 1e-8;
  double bandwidth_hz = 1e6;  // rates are reported in Mbps at this bandwidth
  int workers = 0;            // 0 = hardware concurrency
  std::string output_path;    // prefix; <path>.csv and <path>.json
  OutputFormat output_format = OutputFormat::kBoth;
  bool dump_solutions = false;

  /// Throws ConfigError.
  void validate() const;
  sca::ScaSettings sca_settings() const;
  /// Noise-normalized budget: P = sigma^2 10^(snr/10) with the first user's noise.
  double power_budget(double snr_db) const;
};

/// Defaults for each study; file values and flags are applied on top.
ExperimentConfig alpha_sweep_preset();
ExperimentConfig power_sweep_preset();
ExperimentConfig pareto_preset();
ExperimentConfig distance_table_preset();

/// Applies one `key = value` assignment (dotted keys, comma-separated lists).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Applies every assignment in config text. Blank lines and `#` comments are
/// ignored. Errors name the line number.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

/// Reads and applies a config file; a missing or unreadable file is a
/// ConfigError naming the path.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

/// All keys with their current values in config-file syntax.
std::string to_config_text(const ExperimentConfig& cfg);

struct TrialRecord {
  double weakest_distance = 0.0;
  double tx_snr_db = 0.0;
  double alpha = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;   // Mbps
  double fairness_index = 0.0;
  std::vector<double> rates;  // Mbps, weakest user first
  std::vector<double> slack_rates;  // bits/s/Hz
  double f1_max = 0.0;     // bits/s/Hz
  double transmit_power = 0.0;
  bool sic_ok = true;
  int iterations = 0;
  sca::RunStatus status = sca::RunStatus::kIterationLimit;
  bool converged = false;
  bool stalled = false;
  int z_guard_clamps = 0;
  int gamma_guard_clamps = 0;
  bool chord_cap_used = false;
  double xi_max_drop = 0.0;  // largest decrease between consecutive accepted xi values
  bool utopia_failed = false;  // the shared sum-rate normalization did not solve
  std::string error;           // set when the trial threw before producing a report
  std::optional<BeamformerSet> w;  // kept when dump_solutions is set
  std::optional<ChannelSet> channels;

  bool failed() const { return status == sca::RunStatus::kNumericalFailure || utopia_failed; }
};

/// Trial-averaged values of one (distance, TX-SNR, alpha) cell.
struct Aggregate {
  double weakest_distance = 0.0;
  double tx_snr_db = 0.0;
  double alpha = 0.0;
  int trials_used = 0;
  double sum_rate = 0.0;
  double fairness_index = 0.0;
  std::vector<double> rates;
  double iterations = 0.0;
};

struct SweepResult {
  std::string study;
  ExperimentConfig config;
  std::vector<TrialRecord> records;  // sorted by (distance, snr, trial, alpha)
  std::vector<Aggregate> aggregates;  // sorted by (distance, snr, alpha)
  int failed_trials = 0;  // trial groups dropped from the averages
  int num_records_failed = 0;

  /// Aggregate of a cell; a zero distance matches the config's own geometry.
  /// Throws std::out_of_range when absent.
  const Aggregate& cell(double alpha, double tx_snr_db, double weakest_distance = 0.0) const;
};

/// Core runner: every trial of every (distance, TX-SNR) scenario computes the
/// utopia sum rate once and then solves each alpha of the grid.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& study = "sweep");

SweepResult run_alpha_sweep(const ExperimentConfig& cfg);
SweepResult run_power_sweep(const ExperimentConfig& cfg);
SweepResult run_pareto_front(const ExperimentConfig& cfg);
/// Uses cfg.weakest_distances (or {10, 100, 1000} when empty) for the distance
/// of the generated user 0.
SweepResult run_distance_table(const ExperimentConfig& cfg);

/// Recomputes the means of every cell from its records.
std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& records, int num_users, int& failed_trials);

struct FrontPoint {
  double fairness_index = 0.0;
  double sum_rate = 0.0;
  double alpha = 0.0;
};

/// (FI, sum rate) points of one TX-SNR, sorted by FI ascending.
std::vector<FrontPoint> averaged_front(const SweepResult& result, double tx_snr_db, double weakest_distance = 0.0);
std::vector<FrontPoint> realization_front(const SweepResult& result, double tx_snr_db, int trial,
                                          double weakest_distance = 0.0);

/// Fraction of adjacent pairs (by FI) whose sum rate increases by more than
/// `relative_tol` of the smaller value.
double front_violation_fraction(const std::vector<FrontPoint>& front, double relative_tol);

/// Piecewise-linear sum rate at `fi`; nullopt outside the front's FI range.
std::optional<double> interpolate_sum_rate(const std::vector<FrontPoint>& front, double fi);

/// Spearman rank correlation with average ranks for ties; 0 when a side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Fixed CSV header; distance-table output carries a leading d_1 column.
std::string csv_header(int num_users, bool with_distance);
std::string to_csv(const SweepResult& result);
/// Config echo, aggregates, failure counts and the front of each TX-SNR.
std::string summary_json(const SweepResult& result, const std::string& generated_at = {});
/// Per-record beamformers and channels (records need dump_solutions).
std::string solutions_json(const SweepResult& result);

/// Writes <prefix>.csv / <prefix>.json (and <prefix>.solutions.json when
/// solutions were kept) according to the output format.
std::vector<std::string> write_outputs(const SweepResult& result, const std::string& prefix,
                                       const std::string& generated_at = {});

}  // namespace noma::experiments
