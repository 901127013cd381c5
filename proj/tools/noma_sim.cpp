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

// Command line driver for the beamforming studies.
//
//   noma_sim alpha-sweep --config study.cfg --trials 20 --output out/alpha
//   noma_sim solve-one --alpha 0.5 --tx-snr 30 --seed 7
//
// Exit status: 0 on success, 1 when --strict is set and a trial failed (or on
// a runtime error), 2 on any usage or configuration error.

#include <chrono>
#include <ctime>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "noma/experiments.hpp"
#include "noma/sca.hpp"

namespace {

namespace ex = noma::experiments;

constexpr int kUsageError = 2;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> settings;
  long long seed = -1;
  int trials = 0;
  int workers = -1;
  std::string output;
  bool strict = false;
  bool dump_solutions = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Flat key = value config file");
  cmd->add_option("--set", opts.settings, "Override one config key (key=value); repeatable");
  cmd->add_option("--seed", opts.seed, "Base seed; trial t uses seed + t")->check(CLI::NonNegativeNumber);
  cmd->add_option("--trials", opts.trials, "Monte-Carlo trials")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", opts.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--output", opts.output, "Output prefix for <prefix>.csv and <prefix>.json");
  cmd->add_flag("--strict", opts.strict, "Exit 1 if any trial hit a numerical failure");
  cmd->add_flag("--dump-solutions", opts.dump_solutions, "Also write beamformers and channels per record");
}

// File first, then --set assignments, then the dedicated flags.
void build_config(ex::ExperimentConfig& cfg, const CommonOptions& opts) {
  if (!opts.config_path.empty()) ex::apply_config_file(cfg, opts.config_path);
  for (const auto& s : opts.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ex::ConfigError("--set expects key=value, got '" + s + "'");
    ex::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (opts.seed >= 0) cfg.channel.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.trials > 0) cfg.num_trials = opts.trials;
  if (opts.workers >= 0) cfg.workers = opts.workers;
  if (!opts.output.empty()) cfg.output_path = opts.output;
  if (opts.dump_solutions) cfg.dump_solutions = true;
  cfg.validate();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int run_study(const ex::ExperimentConfig& cfg, const CommonOptions& opts,
              const std::function<ex::SweepResult(const ex::ExperimentConfig&)>& study) {
  const auto result = study(cfg);
  const auto written = ex::write_outputs(result, cfg.output_path, utc_timestamp());
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  std::cout << result.records.size() << " records, " << result.failed_trials << " failed trial group(s)\n";
  if (opts.strict && result.num_records_failed > 0) {
    std::cerr << "noma_sim: " << result.num_records_failed << " record(s) ended in numerical failure\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum-rate / fairness trade-off beamforming simulator for downlink MISO-NOMA"};
  app.require_subcommand(1);

  struct Study {
    const char* name;
    const char* help;
    ex::ExperimentConfig (*preset)();
    ex::SweepResult (*run)(const ex::ExperimentConfig&);
  };
  const std::vector<Study> studies = {
      {"alpha-sweep", "Sum rate and FI over the weight grid", ex::alpha_sweep_preset, ex::run_alpha_sweep},
      {"power-sweep", "Per-user rates over TX-SNR and weights", ex::power_sweep_preset, ex::run_power_sweep},
      {"pareto", "(FI, sum rate) fronts per TX-SNR", ex::pareto_preset, ex::run_pareto_front},
      {"distance-table", "Weakest-user distance study", ex::distance_table_preset, ex::run_distance_table},
  };

  std::vector<CommonOptions> study_opts(studies.size());
  std::vector<CLI::App*> study_cmds;
  for (std::size_t i = 0; i < studies.size(); ++i) {
    auto* cmd = app.add_subcommand(studies[i].name, studies[i].help);
    add_common(cmd, study_opts[i]);
    study_cmds.push_back(cmd);
  }

  CommonOptions one_opts;
  double alpha = 0.5;
  double tx_snr = 30.0;
  bool dump_problems = false;
  bool no_beamformers = false;
  auto* one = app.add_subcommand("solve-one", "Solve one realization and print its run report as JSON");
  one->add_option("--config", one_opts.config_path, "Flat key = value config file");
  one->add_option("--set", one_opts.settings, "Override one config key (key=value); repeatable");
  one->add_option("--alpha", alpha, "Fairness weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  one->add_option("--tx-snr", tx_snr, "TX-SNR in dB");
  one->add_option("--seed", one_opts.seed, "Channel seed")->check(CLI::NonNegativeNumber);
  one->add_flag("--dump-problems", dump_problems, "Include every subproblem in text form");
  one->add_flag("--no-beamformers", no_beamformers, "Omit the beamformers from the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    for (std::size_t i = 0; i < studies.size(); ++i) {
      if (!study_cmds[i]->parsed()) continue;
      auto cfg = studies[i].preset();
      build_config(cfg, study_opts[i]);
      return run_study(cfg, study_opts[i], studies[i].run);
    }

    auto cfg = ex::alpha_sweep_preset();
    build_config(cfg, one_opts);
    const auto h = noma::generate_channels(cfg.channel);
    auto settings = cfg.sca_settings();
    settings.keep_problem_dumps = dump_problems;
    const double budget = cfg.power_budget(tx_snr);
    const double f1_max = alpha > 0.0 ? noma::sca::utopia_sum_rate(h, budget, cfg.sca_settings()) : 1.0;
    const auto report = alpha > 0.0 ? noma::sca::sca_solve(h, {alpha, f1_max}, budget, settings)
                                    : noma::sca::utopia_run(h, budget, settings);
    std::cout << noma::sca::to_json(report, !no_beamformers) << "\n";
    return 0;
  } catch (const ex::ConfigError& e) {
    std::cerr << "noma_sim: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "noma_sim: " << e.what() << "\n";
    return 1;
  }
}
