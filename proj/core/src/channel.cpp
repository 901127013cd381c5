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

#include "noma/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace noma {

void ChannelConfig::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("num_antennas must be >= 1");
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  const auto k = static_cast<std::size_t>(num_users);
  if (distances.size() != k) {
    throw std::invalid_argument("distances must have one entry per user");
  }
  if (noise_variances.size() != k) {
    throw std::invalid_argument("noise_variances must have one entry per user");
  }
  for (double d : distances) {
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("distances must be > 0");
  }
  if (!(path_loss_exponent >= 0.0) || !std::isfinite(path_loss_exponent)) {
    throw std::invalid_argument("path_loss_exponent must be >= 0");
  }
  for (double s : noise_variances) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("noise variances must be > 0");
  }
}

double ChannelSet::noise_stddev(int k) const { return std::sqrt(noise_variance(k)); }

std::vector<std::size_t> strength_order(const std::vector<Eigen::VectorXcd>& raw) {
  if (raw.empty()) throw std::invalid_argument("strength_order: no channels");
  const auto n = raw.front().size();
  for (const auto& v : raw) {
    if (v.size() != n) throw std::invalid_argument("strength_order: mismatched vector lengths");
  }
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a].squaredNorm() < raw[b].squaredNorm();
  });
  return order;
}

ChannelSet order_users(const std::vector<Eigen::VectorXcd>& raw, ChannelConfig config) {
  const auto order = strength_order(raw);
  const auto k = raw.size();
  const auto n = raw.front().size();

  if (config.distances.size() != k || config.noise_variances.size() != k ||
      config.num_antennas != static_cast<int>(n)) {
    config.num_antennas = static_cast<int>(n);
    config.num_users = static_cast<int>(k);
    config.distances.assign(k, 1.0);
    config.noise_variances.assign(k, 1.0);
  }

  ChannelSet out;
  out.h.resize(n, static_cast<Eigen::Index>(k));
  out.distances.resize(k);
  out.noise_variances.resize(k);
  out.source_index = order;
  out.ordered_index.resize(k);
  for (std::size_t pos = 0; pos < k; ++pos) {
    const auto src = order[pos];
    out.h.col(static_cast<Eigen::Index>(pos)) = raw[src];
    out.distances[pos] = config.distances[src];
    out.noise_variances[pos] = config.noise_variances[src];
    out.ordered_index[src] = pos;
  }
  out.config = std::move(config);
  return out;
}

ChannelSet generate_channels(const ChannelConfig& config, std::mt19937_64& rng) {
  config.validate();
  // Unit-variance circularly symmetric entries: variance 1/2 per component.
  std::normal_distribution<double> component(0.0, std::sqrt(0.5));
  std::vector<Eigen::VectorXcd> raw;
  raw.reserve(static_cast<std::size_t>(config.num_users));
  for (int i = 0; i < config.num_users; ++i) {
    const double gain =
        std::sqrt(std::pow(config.distances[static_cast<std::size_t>(i)], -config.path_loss_exponent));
    Eigen::VectorXcd h(config.num_antennas);
    for (int a = 0; a < config.num_antennas; ++a) {
      const double re = component(rng);
      const double im = component(rng);
      h(a) = gain * std::complex<double>(re, im);
    }
    raw.push_back(std::move(h));
  }
  return order_users(raw, config);
}

ChannelSet generate_channels(const ChannelConfig& config) {
  std::mt19937_64 rng(config.seed);
  return generate_channels(config, rng);
}

ChannelSet make_channel_set(const std::vector<Eigen::VectorXcd>& raw,
                            const std::vector<double>& noise_variances) {
  if (raw.empty()) throw std::invalid_argument("make_channel_set: no channels");
  if (noise_variances.size() != raw.size()) {
    throw std::invalid_argument("make_channel_set: one noise variance per channel required");
  }
  ChannelConfig cfg;
  cfg.num_antennas = static_cast<int>(raw.front().size());
  cfg.num_users = static_cast<int>(raw.size());
  cfg.distances.assign(raw.size(), 1.0);
  cfg.path_loss_exponent = 0.0;
  cfg.noise_variances = noise_variances;
  cfg.validate();
  for (const auto& h : raw) {
    if (!h.allFinite() || h.squaredNorm() == 0.0) {
      throw std::invalid_argument("make_channel_set: channels must be finite and nonzero");
    }
  }
  return order_users(raw, cfg);
}

std::string channels_to_json(const ChannelSet& channels) {
  nlohmann::json users = nlohmann::json::array();
  for (int k = 0; k < channels.num_users(); ++k) {
    nlohmann::json entries = nlohmann::json::array();
    for (int a = 0; a < channels.num_antennas(); ++a) {
      const auto v = channels.h(a, k);
      entries.push_back({v.real(), v.imag()});
    }
    users.push_back(std::move(entries));
  }
  return users.dump();
}

}  // namespace noma
