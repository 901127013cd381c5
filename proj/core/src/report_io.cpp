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

#include "report_json.hpp"

namespace noma {
namespace detail {

using nlohmann::json;

json beamformers_json(const BeamformerSet& w) {
  // One array per user, each entry an [re, im] pair per antenna.
  json users = json::array();
  for (int i = 0; i < w.num_users(); ++i) {
    json antennas = json::array();
    for (int n = 0; n < w.num_antennas(); ++n) antennas.push_back({w.w(n, i).real(), w.w(n, i).imag()});
    users.push_back(std::move(antennas));
  }
  return users;
}

json metrics_json(const MetricsReport& report) {
  return json{{"rates", report.rates},
              {"sum_rate", report.sum_rate},
              {"fairness_index", report.fairness_index},
              {"transmit_power", report.transmit_power},
              {"sic_ok", report.sic_ok},
              {"sic_violation", report.sic_violation}};
}

json run_report_json(const sca::RunReport& report, bool include_beamformers) {
  json statuses = json::array();
  for (const auto s : report.subproblem_statuses) statuses.push_back(conic::to_string(s));
  json out{{"status", sca::to_string(report.status)},
           {"converged", report.converged},
           {"stalled", report.stalled},
           {"iterations", report.iterations},
           {"alpha", report.alpha},
           {"f1_max", report.f1_max},
           {"power_budget", report.power_budget},
           {"xi_trace", report.xi_trace},
           {"subproblem_objectives", report.subproblem_objectives},
           {"subproblem_statuses", std::move(statuses)},
           {"metrics", metrics_json(report.metrics)},
           {"slack_rates", report.slack_rates},
           {"slack_fairness", report.slack_fairness},
           {"restrictions",
            {{"chord_cap_used", report.chord_cap_used},
             {"phase_restricted_signal", report.phase_restricted_signal},
             {"z_guard_clamps", report.z_guard_clamps},
             {"gamma_guard_clamps", report.gamma_guard_clamps}}},
           {"solver",
            {{"retries", report.solver_retries},
             {"step_halvings", report.step_halvings},
             {"damped_recoveries", report.damped_recoveries},
             {"newton_steps", report.newton_steps},
             {"max_expansion_violation", report.max_expansion_violation}}}};
  if (include_beamformers) out["beamformers"] = beamformers_json(report.w);
  if (!report.problem_dumps.empty()) out["problem_dumps"] = report.problem_dumps;
  return out;
}

}  // namespace detail

std::string to_json(const MetricsReport& report) { return detail::metrics_json(report).dump(); }

namespace sca {
std::string to_json(const RunReport& report, bool include_beamformers) {
  return detail::run_report_json(report, include_beamformers).dump(2);
}
}  // namespace sca

}  // namespace noma
