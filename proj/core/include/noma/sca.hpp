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

#include <complex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "noma/channel.hpp"
#include "noma/conic.hpp"
#include "noma/metrics.hpp"

namespace noma::sca {

/// alpha weights fairness, 1 - alpha weights the normalized sum rate.
struct TradeoffWeights {
  double alpha = 0.5;
  double f1_max = 1.0;  // utopia sum rate of this realization, bits/s/Hz

  double fairness_weight() const { return alpha; }
  double sum_rate_weight() const { return 1.0 - alpha; }
  bool has_sum_rate_branch() const { return alpha < 1.0; }
  bool has_fairness_branch() const { return alpha > 0.0; }
  void validate() const;
};

/// How z >= 2^r enters each subproblem.
enum class PowerOfTwoEncoding {
  kExponentialCone,  // exact
  kChordCap,         // two secants around the previous r inside a trust interval (inner approximation)
};

/// Gradient used for the z-term of the signal-constraint linearization.
enum class SignalGradient {
  kTaylor,       // d/dz sqrt(z - 1) * eta = eta / (2 sqrt(z - 1))
  kUnitInterference,  // 1 / (2 sqrt(z - 1)), i.e. the eta factor dropped
};

enum class StopRule {
  kRelative,  // |xi(n) - xi(n-1)| < threshold * |xi(n-1)|; invariant to the f1_max scaling
  kAbsolute,  // |xi(n) - xi(n-1)| < threshold
};

/// Phase reference of the signal constraint at decoder k for stream i.
enum class SignalPhase {
  kCommon,      // Re(h_k^H w_i) at every decoder
  kPerDecoder,  // Re(conj(u_ki) h_k^H w_i), u_ki = phase of the previous iterate's h_k^H w_i
};

struct ScaSettings {
  double threshold = 1e-3;
  StopRule stop_rule = StopRule::kRelative;
  int max_iterations = 100;
  conic::SolverSettings solver;
  PowerOfTwoEncoding power_of_two = PowerOfTwoEncoding::kExponentialCone;
  double trust_radius = 1.0;  // kChordCap only
  SignalGradient signal_gradient = SignalGradient::kTaylor;
  SignalPhase signal_phase = SignalPhase::kCommon;
  double z_guard = 1e-6;      // z(n-1) - 1 is clamped to at least this
  double gamma_guard = 1e-9;  // gamma(n-1) is clamped to at least this
  double alpha_clamp = 1e-3;  // interior alphas are kept in [clamp, 1 - clamp]
  double init_decay = 0.5;    // geometric power decay of the starting point
  double init_budget_fraction = 0.9;
  int max_halvings = 3;
  bool keep_problem_dumps = false;
};

/// Effective fairness weight used inside the subproblem.
double effective_alpha(double alpha, const ScaSettings& settings);

/// One outer iterate: beamformers plus every slack of the convexified problem.
/// Slack rates are the rates the subproblem can certify. They never exceed
/// the achieved rates, and equal them under SignalPhase::kPerDecoder.
struct ScaIterate {
  int iteration = 0;
  BeamformerSet w;
  double xi = 0.0;
  double xi_sum_rate = 0.0;  // xi_1
  double xi_fairness = 0.0;  // xi_2
  double gamma = 0.0;
  double beta = 0.0;
  std::vector<double> r;
  std::vector<double> z;
  Eigen::MatrixXd eta;  // eta(i, k), k >= i
};

/// Sets every slack from `w` by tightening its defining inequality.
ScaIterate consistent_iterate(const BeamformerSet& w, const ChannelSet& h, const TradeoffWeights& weights,
                              const ScaSettings& settings = {});

/// Feasible start: per-user directions whose projections onto every decoding
/// user are real and positive, geometric power decay at a fraction of the
/// budget, decay shrunk until the SIC ordering holds strictly.
/// Throws std::runtime_error if no strictly SIC-feasible start is found.
BeamformerSet initial_beamformers(const ChannelSet& h, double power_budget, const ScaSettings& settings = {});

ScaIterate initialize_feasible(const ChannelSet& h, double power_budget, const TradeoffWeights& weights,
                               const ScaSettings& settings = {});

/// rhs(z, eta) = eta_coef * eta + z_coef * z + constant, an affine form.
struct SignalLinearization {
  double eta_coef = 0.0;
  double z_coef = 0.0;
  double constant = 0.0;
  bool clamped = false;
  double evaluate(double z, double eta) const { return eta_coef * eta + z_coef * z + constant; }
};

/// Linearization of sqrt(z - 1) * eta around (z_prev, eta_prev).
SignalLinearization linearize_signal_constraint(double z_prev, double eta_prev, const ScaSettings& settings = {});
SignalLinearization linearize_signal_constraint(const ScaIterate& state, int i, int k,
                                                const ScaSettings& settings = {});

/// rhs(gamma, beta) = gamma_coef * gamma + beta_coef * beta + constant.
struct FairnessLinearization {
  double gamma_coef = 0.0;
  double beta_coef = 0.0;
  double constant = 0.0;
  bool clamped = false;
  double evaluate(double gamma, double beta) const { return gamma_coef * gamma + beta_coef * beta + constant; }
};

/// Linearization of sqrt(gamma) * beta around (gamma_prev, beta_prev).
FairnessLinearization linearize_fairness_product(double gamma_prev, double beta_prev,
                                                 const ScaSettings& settings = {});
FairnessLinearization linearize_fairness_product(const ScaIterate& state, const ScaSettings& settings = {});

/// Tangent of |a|^2 at a_prev, evaluated as a function of (Re a, Im a):
/// value(a) = 2 Re(conj(a_prev) a) - |a_prev|^2 <= |a|^2.
struct SicLinearization {
  std::complex<double> anchor;
  double evaluate(std::complex<double> a) const {
    return 2.0 * (anchor.real() * a.real() + anchor.imag() * a.imag()) - std::norm(anchor);
  }
};
SicLinearization linearize_sic_terms(const ScaIterate& state, const ChannelSet& h, int k, int j);

/// Column map of a built subproblem; -1 marks a variable absent in this mode.
struct VariableLayout {
  int num_antennas = 0;
  int num_users = 0;
  std::vector<int> w_re;  // index i * N + n
  std::vector<int> w_im;
  int xi = -1;
  int xi_sum_rate = -1;
  int xi_fairness = -1;
  int gamma = -1;
  int beta = -1;
  std::vector<int> r;
  std::vector<int> z;
  Eigen::MatrixXi eta;  // -1 below the diagonal

  int w_re_col(int i, int n) const { return w_re[static_cast<std::size_t>(i * num_antennas + n)]; }
  int w_im_col(int i, int n) const { return w_im[static_cast<std::size_t>(i * num_antennas + n)]; }
};

/// Real and imaginary parts of h_k^H w_i as affine expressions in the beamformer columns.
std::pair<conic::AffineExpr, conic::AffineExpr> inner_product(const VariableLayout& layout, const ChannelSet& h,
                                                              int i, int k);

struct SocRows {
  conic::AffineExpr t;
  std::vector<conic::AffineExpr> v;
  std::size_t dimension() const { return v.size() + 1; }
};

/// eta(i,k) >= ||[h_k^H w_{i+1}, ..., h_k^H w_K, sigma_k]||.
SocRows interference_soc_constraint(const VariableLayout& layout, const ChannelSet& h, int i, int k);

/// beta >= sqrt(K) ||r||.
SocRows rate_norm_soc_constraint(const VariableLayout& layout);

struct Subproblem {
  conic::ConicProblem problem;
  VariableLayout layout;
  std::vector<double> expansion_point;  // the state's own values, column-wise
  int z_clamps = 0;
  int gamma_clamps = 0;
};

Subproblem build_subproblem(const ScaIterate& state, const TradeoffWeights& weights, const ChannelSet& h,
                            double power_budget, const ScaSettings& settings = {});

/// Beamformers stored in a primal vector of `layout`.
BeamformerSet extract_beamformers(const VariableLayout& layout, const std::vector<double>& primal);

enum class RunStatus { kConverged, kIterationLimit, kNumericalFailure };
std::string_view to_string(RunStatus status);

struct RunReport {
  BeamformerSet w;
  std::vector<double> xi_trace;  // accepted iterates, starting with the initial point
  std::vector<double> subproblem_objectives;
  std::vector<conic::SolveStatus> subproblem_statuses;
  bool converged = false;
  bool stalled = false;  // stopped because no damped step improved xi
  int iterations = 0;
  RunStatus status = RunStatus::kIterationLimit;
  MetricsReport metrics;  // achieved, recomputed from w
  std::vector<double> slack_rates;
  double slack_fairness = 0.0;
  double alpha = 0.0;
  double f1_max = 0.0;
  double power_budget = 0.0;
  bool chord_cap_used = false;
  bool phase_restricted_signal = true;  // kCommon signal phase
  int z_guard_clamps = 0;
  int gamma_guard_clamps = 0;
  int solver_retries = 0;
  int step_halvings = 0;
  int damped_recoveries = 0;  // steps accepted from a non-optimal subproblem
  double max_expansion_violation = 0.0;  // previous iterate checked against each subproblem
  int newton_steps = 0;
  std::vector<std::string> problem_dumps;
};

RunReport sca_solve(const ChannelSet& h, const TradeoffWeights& weights, double power_budget,
                    const ScaSettings& settings = {});

/// Sum-rate utopia point: the same engine with the fairness branch removed.
RunReport utopia_run(const ChannelSet& h, double power_budget, const ScaSettings& settings = {});
double utopia_sum_rate(const ChannelSet& h, double power_budget, const ScaSettings& settings = {});

std::string to_json(const RunReport& report, bool include_beamformers = true);

}  // namespace noma::sca
