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

#include "noma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace noma {
namespace {

void check_dimensions(const BeamformerSet& w, const ChannelSet& h) {
  if (w.num_antennas() != h.num_antennas() || w.num_users() != h.num_users()) {
    throw std::invalid_argument("beamformer dimensions do not match the channel set");
  }
}

void check_user(const ChannelSet& h, int i, const char* what) {
  if (i < 0 || i >= h.num_users()) {
    throw std::out_of_range(std::string(what) + ": user index out of range");
  }
}

double received_power(const BeamformerSet& w, const ChannelSet& h, int k, int j) {
  return std::norm(h.h.col(k).dot(w.w.col(j)));  // Eigen's dot conjugates the left operand
}

}  // namespace

double sinr_of_signal_at_user(const BeamformerSet& w, const ChannelSet& h, int i, int k) {
  check_dimensions(w, h);
  check_user(h, i, "sinr_of_signal_at_user");
  check_user(h, k, "sinr_of_signal_at_user");
  if (k < i) throw std::invalid_argument("sinr_of_signal_at_user: requires k >= i");
  double interference = h.noise_variance(k);
  for (int j = i + 1; j < h.num_users(); ++j) interference += received_power(w, h, k, j);
  return received_power(w, h, k, i) / interference;
}

double effective_sinr(const BeamformerSet& w, const ChannelSet& h, int i) {
  check_user(h, i, "effective_sinr");
  double best = std::numeric_limits<double>::infinity();
  for (int k = i; k < h.num_users(); ++k) best = std::min(best, sinr_of_signal_at_user(w, h, i, k));
  return best;
}

double rate_from_sinr(double sinr, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return bandwidth_hz * std::log2(1.0 + sinr);
}

double user_rate(const BeamformerSet& w, const ChannelSet& h, int i, double bandwidth_hz) {
  return rate_from_sinr(effective_sinr(w, h, i), bandwidth_hz);
}

std::vector<double> user_rates(const BeamformerSet& w, const ChannelSet& h, double bandwidth_hz) {
  std::vector<double> rates(static_cast<std::size_t>(h.num_users()));
  for (int i = 0; i < h.num_users(); ++i) rates[static_cast<std::size_t>(i)] = user_rate(w, h, i, bandwidth_hz);
  return rates;
}

double sum_rate(const BeamformerSet& w, const ChannelSet& h, double bandwidth_hz) {
  double total = 0.0;
  for (double r : user_rates(w, h, bandwidth_hz)) total += r;
  return total;
}

double fairness_index(std::span<const double> rates) {
  if (rates.empty()) throw std::invalid_argument("fairness_index: empty rate vector");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double r : rates) {
    if (r < 0.0 || !std::isfinite(r)) throw std::invalid_argument("fairness_index: rates must be finite and >= 0");
    sum += r;
    sum_sq += r * r;
  }
  if (sum_sq == 0.0) throw DegenerateInputError("fairness_index: all rates are zero");
  return sum * sum / (static_cast<double>(rates.size()) * sum_sq);
}

double transmit_power(const BeamformerSet& w) { return w.w.squaredNorm(); }

SicCheck check_sic_ordering(const BeamformerSet& w, const ChannelSet& h, double tol) {
  check_dimensions(w, h);
  SicCheck out;
  for (int k = 0; k < h.num_users(); ++k) {
    for (int j = 0; j + 1 < h.num_users(); ++j) {
      const double gap = received_power(w, h, k, j + 1) - received_power(w, h, k, j);
      out.worst_violation = std::max(out.worst_violation, gap);
    }
  }
  out.ok = out.worst_violation <= tol;
  return out;
}

MetricsReport evaluate(const BeamformerSet& w, const ChannelSet& h, double bandwidth_hz, double sic_tol) {
  check_dimensions(w, h);
  const int users = h.num_users();
  MetricsReport report;
  report.sinr = Eigen::MatrixXd::Zero(users, users);
  report.rates.resize(static_cast<std::size_t>(users));
  for (int i = 0; i < users; ++i) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = i; k < users; ++k) {
      report.sinr(i, k) = sinr_of_signal_at_user(w, h, i, k);
      worst = std::min(worst, report.sinr(i, k));
    }
    report.rates[static_cast<std::size_t>(i)] = rate_from_sinr(worst, bandwidth_hz);
    report.sum_rate += report.rates[static_cast<std::size_t>(i)];
  }
  try {
    report.fairness_index = fairness_index(report.rates);
  } catch (const DegenerateInputError&) {
    report.fairness_index = 0.0;
  }
  report.transmit_power = transmit_power(w);
  const auto sic = check_sic_ordering(w, h, sic_tol);
  report.sic_ok = sic.ok;
  report.sic_violation = sic.worst_violation;
  return report;
}

}  // namespace noma
