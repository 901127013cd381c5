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

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace noma {

/// Geometry and noise of one downlink scenario.
///
/// Per-user vectors (`distances`, `noise_variances`) are indexed by the
/// generated user index, before any strength ordering is applied.
struct ChannelConfig {
  int num_antennas = 4;
  int num_users = 5;
  std::vector<double> distances{50.0, 4.0, 3.0, 2.0, 1.0};  // meters
  double path_loss_exponent = 2.0;
  std::vector<double> noise_variances{1.0, 1.0, 1.0, 1.0, 1.0};  // watts
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Channels sorted so that ||h_0||^2 <= ||h_1||^2 <= ... (user 0 is weakest).
///
/// Column k of `h` is the channel of ordered user k. `distances` and
/// `noise_variances` follow the same ordering. `source_index[k]` is the
/// generated index of ordered user k and `ordered_index` is its inverse.
struct ChannelSet {
  Eigen::MatrixXcd h;
  std::vector<double> distances;
  std::vector<double> noise_variances;
  std::vector<std::size_t> source_index;
  std::vector<std::size_t> ordered_index;
  ChannelConfig config;

  int num_antennas() const { return static_cast<int>(h.rows()); }
  int num_users() const { return static_cast<int>(h.cols()); }
  double noise_variance(int k) const { return noise_variances[static_cast<std::size_t>(k)]; }
  double noise_stddev(int k) const;
};

/// Stable permutation sorting vectors by ascending squared norm; entry k is
/// the original index of the vector placed at position k.
/// Throws std::invalid_argument on an empty list or mismatched lengths.
std::vector<std::size_t> strength_order(const std::vector<Eigen::VectorXcd>& raw);

/// Orders raw channels by strength. Per-user fields of `config` are permuted
/// alongside; when `config` does not describe the raw vectors its per-user
/// fields are replaced with unit distances and unit noise.
ChannelSet order_users(const std::vector<Eigen::VectorXcd>& raw, ChannelConfig config = {});

/// Draws one realization h_i = sqrt(d_i^-kappa) g_i with g_i ~ CN(0, I) and
/// orders it. Deterministic in `config.seed`.
ChannelSet generate_channels(const ChannelConfig& config);

/// Same draw, consuming an external generator (Monte-Carlo loops).
ChannelSet generate_channels(const ChannelConfig& config, std::mt19937_64& rng);

/// Channel set from explicit vectors (already ordered or not), used by tests
/// and the scalar reductions. Noise variances are per input vector.
ChannelSet make_channel_set(const std::vector<Eigen::VectorXcd>& raw,
                            const std::vector<double>& noise_variances);

/// JSON array (one entry per ordered user) of [re, im] pairs.
std::string channels_to_json(const ChannelSet& channels);

}  // namespace noma
