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
#include <cmath>

#include "noma/sca.hpp"

namespace noma::sca {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kIterationLimit: return "iteration_limit";
    case RunStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

constexpr double kAcceptSlack = 1e-9;

conic::ConicSolution solve_with_retry(const Subproblem& sp, const ScaSettings& settings, RunReport& report) {
  conic::SolverSettings first = settings.solver;
  first.initial_point = sp.expansion_point;
  auto sol = conic::solve(sp.problem, first);
  report.newton_steps += sol.newton_steps;
  if (sol.optimal()) return sol;

  // One retry: tighter tolerance, gentler barrier schedule, larger budget.
  ++report.solver_retries;
  conic::SolverSettings second = first;
  second.tolerance = first.tolerance * 0.1;
  second.barrier_growth = std::max(2.0, std::sqrt(first.barrier_growth));
  second.max_newton_steps = 2 * first.max_newton_steps;
  auto retry = conic::solve(sp.problem, second);
  report.newton_steps += retry.newton_steps;
  return retry;
}

bool within_budget(const BeamformerSet& w, const ChannelSet& h, double power_budget) {
  return transmit_power(w) <= power_budget * (1.0 + 1e-9) && check_sic_ordering(w, h, 0.0).ok;
}

}  // namespace

RunReport sca_solve(const ChannelSet& h, const TradeoffWeights& weights, double power_budget,
                    const ScaSettings& settings) {
  weights.validate();
  RunReport report;
  report.alpha = weights.alpha;
  report.f1_max = weights.f1_max;
  report.power_budget = power_budget;
  report.chord_cap_used = settings.power_of_two == PowerOfTwoEncoding::kChordCap;
  report.phase_restricted_signal = settings.signal_phase == SignalPhase::kCommon;

  ScaIterate state = initialize_feasible(h, power_budget, weights, settings);
  report.xi_trace.push_back(state.xi);

  for (int n = 1; n <= settings.max_iterations; ++n) {
    const Subproblem sp = build_subproblem(state, weights, h, power_budget, settings);
    report.z_guard_clamps += sp.z_clamps;
    report.gamma_guard_clamps += sp.gamma_clamps;
    report.max_expansion_violation =
        std::max(report.max_expansion_violation, sp.problem.max_violation(sp.expansion_point));
    if (settings.keep_problem_dumps) report.problem_dumps.push_back(sp.problem.to_text());

    const auto sol = solve_with_retry(sp, settings, report);
    report.subproblem_statuses.push_back(sol.status);
    report.subproblem_objectives.push_back(sol.objective);
    const bool solved = sol.optimal();
    const BeamformerSet target = extract_beamformers(sp.layout, sol.primal);

    // Re-score the candidate through its consistent slacks and halve the step
    // toward the previous beamformers while that value decreases. A point from
    // a failed solve only ever enters through a halved step.
    bool accepted = false;
    ScaIterate candidate;
    if (target.w.allFinite()) {
      double step = solved ? 1.0 : 0.5;
      const int attempts = solved ? settings.max_halvings + 1 : settings.max_halvings;
      for (int attempt = 0; attempt < attempts; ++attempt, step *= 0.5) {
        if (attempt > 0 || !solved) ++report.step_halvings;
        const BeamformerSet trial(state.w.w + step * (target.w - state.w.w));
        if (!within_budget(trial, h, power_budget)) continue;
        candidate = consistent_iterate(trial, h, weights, settings);
        if (candidate.xi >= state.xi - kAcceptSlack) {
          accepted = true;
          break;
        }
      }
    }

    report.iterations = n;
    if (!accepted) {
      report.xi_trace.push_back(state.xi);
      if (!solved) {
        // Best-so-far is kept; the run is not reported as converged.
        report.status = RunStatus::kNumericalFailure;
        break;
      }
      // No damped step improves xi: the iterate is a fixed point of the update.
      report.stalled = true;
      report.converged = true;
      report.status = RunStatus::kConverged;
      break;
    }
    if (!solved) ++report.damped_recoveries;

    candidate.iteration = n;
    const double change = std::abs(candidate.xi - state.xi);
    const double limit =
        settings.stop_rule == StopRule::kRelative ? settings.threshold * std::abs(state.xi) : settings.threshold;
    state = std::move(candidate);
    report.xi_trace.push_back(state.xi);
    if (change < limit) {
      report.converged = true;
      report.status = RunStatus::kConverged;
      break;
    }
  }

  report.w = state.w;
  report.slack_rates = state.r;
  report.slack_fairness = state.gamma;
  report.metrics = evaluate(state.w, h);
  return report;
}

RunReport utopia_run(const ChannelSet& h, double power_budget, const ScaSettings& settings) {
  TradeoffWeights srm;
  srm.alpha = 0.0;
  srm.f1_max = 1.0;
  auto report = sca_solve(h, srm, power_budget, settings);
  report.f1_max = report.metrics.sum_rate;
  return report;
}

double utopia_sum_rate(const ChannelSet& h, double power_budget, const ScaSettings& settings) {
  return utopia_run(h, power_budget, settings).metrics.sum_rate;
}

}  // namespace noma::sca
