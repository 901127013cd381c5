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
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "noma/sca.hpp"

namespace noma::sca {

using conic::AffineExpr;

void TradeoffWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(f1_max > 0.0) || !std::isfinite(f1_max)) throw std::invalid_argument("f1_max must be positive");
}

double effective_alpha(double alpha, const ScaSettings& settings) {
  if (alpha <= 0.0) return 0.0;
  if (alpha >= 1.0) return 1.0;
  return std::clamp(alpha, settings.alpha_clamp, 1.0 - settings.alpha_clamp);
}

ScaIterate consistent_iterate(const BeamformerSet& w, const ChannelSet& h, const TradeoffWeights& weights,
                              const ScaSettings& settings) {
  const int users = h.num_users();
  ScaIterate it;
  it.w = w;
  it.r.assign(static_cast<std::size_t>(users), 0.0);
  it.z.assign(static_cast<std::size_t>(users), 1.0);
  it.eta = Eigen::MatrixXd::Zero(users, users);

  // gains(k, j) = h_k^H w_j
  const Eigen::MatrixXcd gains = h.h.adjoint() * w.w;
  for (int i = 0; i < users; ++i) {
    double ratio = std::numeric_limits<double>::infinity();
    for (int k = i; k < users; ++k) {
      double interference = h.noise_variance(k);
      for (int j = i + 1; j < users; ++j) interference += std::norm(gains(k, j));
      it.eta(i, k) = std::sqrt(interference);
      const double projection =
          settings.signal_phase == SignalPhase::kPerDecoder ? std::abs(gains(k, i)) : std::max(0.0, gains(k, i).real());
      const double amplitude = projection / it.eta(i, k);
      ratio = std::min(ratio, amplitude * amplitude);
    }
    it.z[static_cast<std::size_t>(i)] = 1.0 + ratio;
    it.r[static_cast<std::size_t>(i)] = std::log2(1.0 + ratio);
  }

  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : it.r) {
    sum += v;
    sum_sq += v * v;
  }
  it.beta = std::sqrt(static_cast<double>(users) * sum_sq);
  it.gamma = it.beta > 0.0 ? sum * sum / (it.beta * it.beta) : 0.0;

  const double alpha = effective_alpha(weights.alpha, settings);
  it.xi_sum_rate = weights.has_sum_rate_branch() ? (1.0 - alpha) * sum / weights.f1_max : 0.0;
  it.xi_fairness = weights.has_fairness_branch() ? alpha * it.gamma : 0.0;
  it.xi = it.xi_sum_rate + it.xi_fairness;
  return it;
}

namespace {

// Unit vector v maximizing the smallest normalized real projection
// Re(h_k^H v) / ||h_k|| over the decoding users k >= i.
Eigen::VectorXcd signal_direction(const ChannelSet& h, int i) {
  const int users = h.num_users();
  const int n = h.num_antennas();
  const int m = users - i;
  const Eigen::MatrixXcd sub = h.h.rightCols(m);
  Eigen::VectorXd norms(m);
  for (int c = 0; c < m; ++c) norms(c) = sub.col(c).norm();

  // Regularized least squares for h_k^H v = ||h_k||.
  Eigen::MatrixXcd gram = sub.adjoint() * sub;
  const double ridge = 1e-3 * gram.diagonal().real().sum() / m;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXcd target = norms.cast<std::complex<double>>();
  Eigen::VectorXcd candidates[2] = {sub * gram.ldlt().solve(target), h.h.col(i)};

  auto worst_projection = [&](const Eigen::VectorXcd& v) {
    double worst = std::numeric_limits<double>::infinity();
    for (int c = 0; c < m; ++c) worst = std::min(worst, sub.col(c).dot(v).real() / norms(c));
    return worst;
  };

  Eigen::VectorXcd best = Eigen::VectorXcd::Zero(n);
  double best_score = -std::numeric_limits<double>::infinity();
  constexpr int kPhases = 360;
  for (auto& v : candidates) {
    const double len = v.norm();
    if (!(len > 0.0) || !v.allFinite()) continue;
    v /= len;
    for (int p = 0; p < kPhases; ++p) {
      const double theta = 2.0 * std::numbers::pi * p / kPhases;
      const Eigen::VectorXcd rotated = v * std::polar(1.0, theta);
      const double score = worst_projection(rotated);
      if (score > best_score) {
        best_score = score;
        best = rotated;
      }
    }
  }
  return best;
}

double sic_margin(const BeamformerSet& w, const ChannelSet& h) {
  const Eigen::MatrixXcd gains = h.h.adjoint() * w.w;
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < h.num_users(); ++k) {
    for (int j = 0; j + 1 < h.num_users(); ++j) {
      margin = std::min(margin, std::norm(gains(k, j)) - std::norm(gains(k, j + 1)));
    }
  }
  return margin;
}

}  // namespace

BeamformerSet initial_beamformers(const ChannelSet& h, double power_budget, const ScaSettings& settings) {
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
  const int users = h.num_users();
  Eigen::MatrixXcd directions(h.num_antennas(), users);
  for (int i = 0; i < users; ++i) directions.col(i) = signal_direction(h, i);

  double decay = settings.init_decay;
  for (int attempt = 0; attempt < 40; ++attempt, decay *= 0.5) {
    Eigen::VectorXd power(users);
    for (int i = 0; i < users; ++i) power(i) = std::pow(decay, i);
    power *= settings.init_budget_fraction * power_budget / power.sum();
    BeamformerSet w(directions);
    for (int i = 0; i < users; ++i) w.w.col(i) *= std::sqrt(power(i));
    if (users == 1 || sic_margin(w, h) > 0.0) return w;
  }
  throw std::runtime_error("initial_beamformers: no strictly SIC-feasible start found");
}

ScaIterate initialize_feasible(const ChannelSet& h, double power_budget, const TradeoffWeights& weights,
                               const ScaSettings& settings) {
  weights.validate();
  return consistent_iterate(initial_beamformers(h, power_budget, settings), h, weights, settings);
}

SignalLinearization linearize_signal_constraint(double z_prev, double eta_prev, const ScaSettings& settings) {
  SignalLinearization lin;
  if (!(z_prev - 1.0 >= settings.z_guard)) {
    z_prev = 1.0 + settings.z_guard;
    lin.clamped = true;
  }
  const double root = std::sqrt(z_prev - 1.0);
  const double z_slope =
      settings.signal_gradient == SignalGradient::kTaylor ? 0.5 * eta_prev / root : 0.5 / root;
  // root * eta_prev + root * (eta - eta_prev) + z_slope * (z - z_prev)
  lin.eta_coef = root;
  lin.z_coef = z_slope;
  lin.constant = -z_slope * z_prev;
  return lin;
}

SignalLinearization linearize_signal_constraint(const ScaIterate& state, int i, int k, const ScaSettings& settings) {
  if (i < 0 || k < i || k >= static_cast<int>(state.r.size())) {
    throw std::out_of_range("linearize_signal_constraint: requires 0 <= i <= k < K");
  }
  return linearize_signal_constraint(state.z[static_cast<std::size_t>(i)], state.eta(i, k), settings);
}

FairnessLinearization linearize_fairness_product(double gamma_prev, double beta_prev, const ScaSettings& settings) {
  FairnessLinearization lin;
  if (!(gamma_prev >= settings.gamma_guard)) {
    gamma_prev = settings.gamma_guard;
    lin.clamped = true;
  }
  const double root = std::sqrt(gamma_prev);
  // root * beta_prev + 0.5 beta_prev (gamma - gamma_prev) / root + root (beta - beta_prev)
  lin.beta_coef = root;
  lin.gamma_coef = 0.5 * beta_prev / root;
  lin.constant = -0.5 * beta_prev * gamma_prev / root;
  return lin;
}

FairnessLinearization linearize_fairness_product(const ScaIterate& state, const ScaSettings& settings) {
  return linearize_fairness_product(state.gamma, state.beta, settings);
}

SicLinearization linearize_sic_terms(const ScaIterate& state, const ChannelSet& h, int k, int j) {
  return SicLinearization{h.h.col(k).dot(state.w.w.col(j))};
}

std::pair<AffineExpr, AffineExpr> inner_product(const VariableLayout& layout, const ChannelSet& h, int i, int k) {
  // conj(a + jb) (x + jy) = (ax + by) + j(ay - bx)
  AffineExpr re;
  AffineExpr im;
  for (int n = 0; n < layout.num_antennas; ++n) {
    const double a = h.h(n, k).real();
    const double b = h.h(n, k).imag();
    re.add(layout.w_re_col(i, n), a).add(layout.w_im_col(i, n), b);
    im.add(layout.w_im_col(i, n), a).add(layout.w_re_col(i, n), -b);
  }
  return {std::move(re), std::move(im)};
}

SocRows interference_soc_constraint(const VariableLayout& layout, const ChannelSet& h, int i, int k) {
  if (i < 0 || k < i || k >= layout.num_users) throw std::out_of_range("interference_soc_constraint: bad indices");
  SocRows soc;
  soc.t = AffineExpr::variable(layout.eta(i, k));
  for (int j = i + 1; j < layout.num_users; ++j) {
    auto [re, im] = inner_product(layout, h, j, k);
    soc.v.push_back(std::move(re));
    soc.v.push_back(std::move(im));
  }
  soc.v.emplace_back(h.noise_stddev(k));
  return soc;
}

SocRows rate_norm_soc_constraint(const VariableLayout& layout) {
  SocRows soc;
  soc.t = AffineExpr::variable(layout.beta);
  const double root_k = std::sqrt(static_cast<double>(layout.num_users));
  for (int col : layout.r) soc.v.push_back(AffineExpr::variable(col, root_k));
  return soc;
}

namespace {

VariableLayout make_layout(conic::ConicProblem& p, int antennas, int users, bool sum_rate_branch,
                           bool fairness_branch) {
  VariableLayout lay;
  lay.num_antennas = antennas;
  lay.num_users = users;
  for (int i = 0; i < users; ++i) {
    for (int n = 0; n < antennas; ++n) {
      const std::string idx = std::to_string(i + 1) + "[" + std::to_string(n + 1) + "]";
      lay.w_re.push_back(p.add_variable("Re(w_" + idx + ")"));
      lay.w_im.push_back(p.add_variable("Im(w_" + idx + ")"));
    }
  }
  lay.xi = p.add_variable("xi");
  if (sum_rate_branch) lay.xi_sum_rate = p.add_variable("xi_1");
  if (fairness_branch) {
    lay.xi_fairness = p.add_variable("xi_2");
    lay.gamma = p.add_variable("gamma");
    lay.beta = p.add_variable("beta");
  }
  for (int i = 0; i < users; ++i) lay.r.push_back(p.add_variable("r_" + std::to_string(i + 1)));
  for (int i = 0; i < users; ++i) lay.z.push_back(p.add_variable("z_" + std::to_string(i + 1)));
  lay.eta = Eigen::MatrixXi::Constant(users, users, -1);
  for (int i = 0; i < users; ++i) {
    for (int k = i; k < users; ++k) {
      lay.eta(i, k) = p.add_variable("eta_" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
    }
  }
  return lay;
}

std::vector<double> pack(const ScaIterate& s, const VariableLayout& lay, int columns) {
  std::vector<double> x(static_cast<std::size_t>(columns), 0.0);
  auto put = [&x](int col, double v) {
    if (col >= 0) x[static_cast<std::size_t>(col)] = v;
  };
  for (int i = 0; i < lay.num_users; ++i) {
    for (int n = 0; n < lay.num_antennas; ++n) {
      put(lay.w_re_col(i, n), s.w.w(n, i).real());
      put(lay.w_im_col(i, n), s.w.w(n, i).imag());
    }
    put(lay.r[static_cast<std::size_t>(i)], s.r[static_cast<std::size_t>(i)]);
    put(lay.z[static_cast<std::size_t>(i)], s.z[static_cast<std::size_t>(i)]);
    for (int k = i; k < lay.num_users; ++k) put(lay.eta(i, k), s.eta(i, k));
  }
  put(lay.xi, s.xi);
  put(lay.xi_sum_rate, s.xi_sum_rate);
  put(lay.xi_fairness, s.xi_fairness);
  put(lay.gamma, s.gamma);
  put(lay.beta, s.beta);
  return x;
}

}  // namespace

Subproblem build_subproblem(const ScaIterate& state, const TradeoffWeights& weights, const ChannelSet& h,
                            double power_budget, const ScaSettings& settings) {
  weights.validate();
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
  const int users = h.num_users();
  const int antennas = h.num_antennas();
  if (state.w.num_users() != users || state.w.num_antennas() != antennas) {
    throw std::invalid_argument("build_subproblem: iterate does not match the channel set");
  }
  const double alpha = effective_alpha(weights.alpha, settings);
  const bool sum_branch = weights.has_sum_rate_branch();
  const bool fair_branch = weights.has_fairness_branch();

  Subproblem sp;
  auto& p = sp.problem;
  sp.layout = make_layout(p, antennas, users, sum_branch, fair_branch);
  const auto& lay = sp.layout;
  p.set_objective(lay.xi, 1.0);

  AffineExpr rate_sum;
  for (int col : lay.r) rate_sum.add(col, 1.0);

  // xi_1 + xi_2 >= xi
  AffineExpr split = AffineExpr::variable(lay.xi, -1.0);
  if (sum_branch) split.add(lay.xi_sum_rate, 1.0);
  if (fair_branch) split.add(lay.xi_fairness, 1.0);
  p.add_nonnegative(std::move(split));

  if (sum_branch) {
    // sum r >= f1_max xi_1 / (1 - alpha)
    p.add_nonnegative(AffineExpr(rate_sum).add(lay.xi_sum_rate, -weights.f1_max / (1.0 - alpha)));
  }

  if (fair_branch) {
    // gamma >= xi_2 / alpha
    p.add_nonnegative(AffineExpr::variable(lay.gamma).add(lay.xi_fairness, -1.0 / alpha));
    const auto lin = linearize_fairness_product(state, settings);
    if (lin.clamped) ++sp.gamma_clamps;
    p.add_nonnegative(AffineExpr(rate_sum)
                          .add(lay.gamma, -lin.gamma_coef)
                          .add(lay.beta, -lin.beta_coef)
                          .add_constant(-lin.constant));
    auto soc = rate_norm_soc_constraint(lay);
    p.add_second_order(std::move(soc.t), std::move(soc.v));
  }

  for (int i = 0; i < users; ++i) {
    const int r = lay.r[static_cast<std::size_t>(i)];
    const int z = lay.z[static_cast<std::size_t>(i)];
    p.add_nonnegative(AffineExpr::variable(r));
    if (settings.power_of_two == PowerOfTwoEncoding::kExponentialCone) {
      conic::encode_power_of_two(p, r, z);
    } else {
      const double center = state.r[static_cast<std::size_t>(i)];
      const double lo = std::max(0.0, center - settings.trust_radius);
      const double hi = center + settings.trust_radius;
      auto chord = [&](double a, double b) {
        const double fa = std::exp2(a);
        const double slope = (std::exp2(b) - fa) / (b - a);
        // z >= fa + slope (r - a)
        p.add_nonnegative(AffineExpr::variable(z).add(r, -slope).add_constant(slope * a - fa));
      };
      if (center - lo > 1e-12) chord(lo, center);
      chord(center, hi);
      p.add_nonnegative(AffineExpr::variable(r).add_constant(-lo));
      p.add_nonnegative(AffineExpr::variable(r, -1.0).add_constant(hi));
    }
  }

  for (int i = 0; i < users; ++i) {
    for (int k = i; k < users; ++k) {
      // Re(conj(u) h_k^H w_i) >= linearized sqrt(z_i - 1) eta_ik, with u = 1 or the
      // previous iterate's unit phase of h_k^H w_i (|x| >= Re(conj(u) x) for |u| = 1).
      const auto lin = linearize_signal_constraint(state, i, k, settings);
      if (lin.clamped) ++sp.z_clamps;
      auto [re, im] = inner_product(lay, h, i, k);
      if (settings.signal_phase == SignalPhase::kPerDecoder) {
        const std::complex<double> g = h.h.col(k).dot(state.w.w.col(i));
        const double mag = std::abs(g);
        if (mag > 0.0) re.scale(g.real() / mag).add(im, g.imag() / mag);
      }
      re.add(lay.eta(i, k), -lin.eta_coef).add(lay.z[static_cast<std::size_t>(i)], -lin.z_coef);
      re.add_constant(-lin.constant);
      p.add_nonnegative(std::move(re));

      auto soc = interference_soc_constraint(lay, h, i, k);
      p.add_second_order(std::move(soc.t), std::move(soc.v));
    }
  }

  // SIC ordering: tangent of |h_k^H w_j|^2 >= |h_k^H w_{j+1}|^2 as a rotated cone,
  // ||(L - 1, 2 Re a, 2 Im a)|| <= L + 1.
  for (int k = 0; k < users; ++k) {
    for (int j = 0; j + 1 < users; ++j) {
      const auto tangent = linearize_sic_terms(state, h, k, j);
      auto [re_j, im_j] = inner_product(lay, h, j, k);
      AffineExpr lower = AffineExpr(re_j).scale(2.0 * tangent.anchor.real());
      lower.add(im_j, 2.0 * tangent.anchor.imag()).add_constant(-std::norm(tangent.anchor));
      auto [re_next, im_next] = inner_product(lay, h, j + 1, k);
      AffineExpr top = AffineExpr(lower).add_constant(1.0);
      AffineExpr first = AffineExpr(lower).add_constant(-1.0);
      p.add_second_order(std::move(top), {std::move(first), re_next.scale(2.0), im_next.scale(2.0)});
    }
  }

  // Power budget: ||vec(W)|| <= sqrt(P)
  std::vector<AffineExpr> coords;
  coords.reserve(static_cast<std::size_t>(2 * antennas * users));
  for (int i = 0; i < users; ++i) {
    for (int n = 0; n < antennas; ++n) {
      coords.push_back(AffineExpr::variable(lay.w_re_col(i, n)));
      coords.push_back(AffineExpr::variable(lay.w_im_col(i, n)));
    }
  }
  p.add_second_order(AffineExpr(std::sqrt(power_budget)), std::move(coords));

  sp.expansion_point = pack(state, lay, p.num_variables());
  return sp;
}

BeamformerSet extract_beamformers(const VariableLayout& layout, const std::vector<double>& primal) {
  BeamformerSet w = BeamformerSet::zeros(layout.num_antennas, layout.num_users);
  for (int i = 0; i < layout.num_users; ++i) {
    for (int n = 0; n < layout.num_antennas; ++n) {
      w.w(n, i) = {primal.at(static_cast<std::size_t>(layout.w_re_col(i, n))),
                   primal.at(static_cast<std::size_t>(layout.w_im_col(i, n)))};
    }
  }
  return w;
}

}  // namespace noma::sca
