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

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noma/channel.hpp"

namespace noma {

/// Column i is the beamforming vector of ordered user i (amplitude units, so
/// |h^H w|^2 is received power in watts).
struct BeamformerSet {
  Eigen::MatrixXcd w;

  BeamformerSet() = default;
  explicit BeamformerSet(Eigen::MatrixXcd vectors) : w(std::move(vectors)) {}
  static BeamformerSet zeros(int num_antennas, int num_users) {
    return BeamformerSet(Eigen::MatrixXcd::Zero(num_antennas, num_users));
  }

  int num_antennas() const { return static_cast<int>(w.rows()); }
  int num_users() const { return static_cast<int>(w.cols()); }
};

/// Raised for inputs on which a metric is mathematically undefined.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SicCheck {
  bool ok = true;
  double worst_violation = 0.0;  // max of |h_k^H w_{j+1}|^2 - |h_k^H w_j|^2, clipped at 0
};

struct MetricsReport {
  std::vector<double> rates;  // bits/s, already scaled by the bandwidth
  double sum_rate = 0.0;
  double fairness_index = 0.0;
  double transmit_power = 0.0;
  bool sic_ok = true;
  double sic_violation = 0.0;
  /// sinr(i, k) for k >= i; entries below the diagonal are zero.
  Eigen::MatrixXd sinr;
};

// All user indices below are zero-based positions in the strength ordering.

/// |h_k^H w_i|^2 / (sum_{j>i} |h_k^H w_j|^2 + sigma_k^2), i.e. the SINR of
/// user i's stream when decoded at user k after cancelling streams j < i.
double sinr_of_signal_at_user(const BeamformerSet& w, const ChannelSet& h, int i, int k);

/// min over k = i..K-1 of sinr_of_signal_at_user.
double effective_sinr(const BeamformerSet& w, const ChannelSet& h, int i);

double rate_from_sinr(double sinr, double bandwidth_hz = 1.0);
double user_rate(const BeamformerSet& w, const ChannelSet& h, int i, double bandwidth_hz = 1.0);
std::vector<double> user_rates(const BeamformerSet& w, const ChannelSet& h, double bandwidth_hz = 1.0);
double sum_rate(const BeamformerSet& w, const ChannelSet& h, double bandwidth_hz = 1.0);

/// Jain's index (sum R)^2 / (K sum R^2). Throws DegenerateInputError when all
/// rates are zero and std::invalid_argument on negative or empty input.
double fairness_index(std::span<const double> rates);

double transmit_power(const BeamformerSet& w);

/// Verifies |h_k^H w_0|^2 >= |h_k^H w_1|^2 >= ... for every receiver k, each
/// adjacent pair allowed to be short by `tol`.
SicCheck check_sic_ordering(const BeamformerSet& w, const ChannelSet& h, double tol = 0.0);

/// Full evaluation. When every rate is zero the fairness index is reported
/// as 0 rather than throwing.
MetricsReport evaluate(const BeamformerSet& w, const ChannelSet& h, double bandwidth_hz = 1.0,
                       double sic_tol = 1e-6);

/// {"rates", "sum_rate", "fairness_index", "transmit_power", "sic_ok"}.
std::string to_json(const MetricsReport& report);

}  // namespace noma
