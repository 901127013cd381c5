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

#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "noma/channel.hpp"

using noma::ChannelConfig;

namespace {

Eigen::VectorXcd scalar(double v) {
  Eigen::VectorXcd x(1);
  x(0) = v;
  return x;
}

}  // namespace

TEST_SUITE("channel") {
  TEST_CASE("unit-variance entries without path loss") {
    ChannelConfig cfg;
    cfg.num_antennas = 1;
    cfg.num_users = 1;
    cfg.distances = {1.0};
    cfg.noise_variances = {1.0};
    cfg.path_loss_exponent = 0.0;
    std::mt19937_64 rng(11);
    double acc = 0.0;
    constexpr int kDraws = 100000;
    for (int t = 0; t < kDraws; ++t) acc += std::norm(noma::generate_channels(cfg, rng).h(0, 0));
    CHECK(acc / kDraws == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("second moment follows N d^-kappa") {
    ChannelConfig cfg;
    cfg.num_antennas = 4;
    cfg.num_users = 1;
    cfg.distances = {10.0};
    cfg.noise_variances = {1.0};
    std::mt19937_64 rng(12);
    double acc = 0.0;
    constexpr int kDraws = 100000;
    for (int t = 0; t < kDraws; ++t) acc += noma::generate_channels(cfg, rng).h.col(0).squaredNorm();
    CHECK(acc / kDraws == doctest::Approx(0.04).epsilon(0.02));
  }

  TEST_CASE("per-user second moments with the default geometry") {
    ChannelConfig cfg;
    std::mt19937_64 rng(13);
    std::vector<double> acc(5, 0.0);
    constexpr int kDraws = 100000;
    for (int t = 0; t < kDraws; ++t) {
      const auto set = noma::generate_channels(cfg, rng);
      for (int k = 0; k < 5; ++k) acc[set.source_index[static_cast<std::size_t>(k)]] += set.h.col(k).squaredNorm();
    }
    for (int u = 0; u < 5; ++u) {
      const double d = cfg.distances[static_cast<std::size_t>(u)];
      CHECK(acc[static_cast<std::size_t>(u)] / kDraws == doctest::Approx(4.0 / (d * d)).epsilon(0.02));
    }
  }

  TEST_CASE("fixed seed is bit-identical") {
    ChannelConfig cfg;
    cfg.seed = 99;
    const auto a = noma::generate_channels(cfg);
    const auto b = noma::generate_channels(cfg);
    CHECK(a.h == b.h);
    CHECK(a.source_index == b.source_index);
    cfg.seed = 100;
    CHECK_FALSE(noma::generate_channels(cfg).h == a.h);
  }

  TEST_CASE("ordering examples") {
    CHECK(noma::strength_order({scalar(2), scalar(1), scalar(3)}) == std::vector<std::size_t>{1, 0, 2});
    CHECK(noma::strength_order({scalar(1), scalar(2), scalar(3)}) == std::vector<std::size_t>{0, 1, 2});
    CHECK(noma::strength_order({scalar(1), scalar(1)}) == std::vector<std::size_t>{0, 1});
    CHECK(noma::strength_order({scalar(-1), scalar(1), scalar(0.5)}) == std::vector<std::size_t>{2, 0, 1});
  }

  TEST_CASE("ordering rejects malformed input") {
    CHECK_THROWS_AS(noma::strength_order({}), std::invalid_argument);
    Eigen::VectorXcd two(2);
    two << 1.0, 1.0;
    CHECK_THROWS_AS(noma::strength_order({scalar(1), two}), std::invalid_argument);
  }

  TEST_CASE("ordered sets are sorted and permute per-user fields") {
    ChannelConfig cfg;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      cfg.seed = seed;
      const auto set = noma::generate_channels(cfg);
      for (int k = 0; k + 1 < set.num_users(); ++k) {
        REQUIRE(set.h.col(k).squaredNorm() <= set.h.col(k + 1).squaredNorm());
      }
      for (int k = 0; k < set.num_users(); ++k) {
        const auto src = set.source_index[static_cast<std::size_t>(k)];
        REQUIRE(set.ordered_index[src] == static_cast<std::size_t>(k));
        REQUIRE(set.distances[static_cast<std::size_t>(k)] == cfg.distances[src]);
        REQUIRE(set.h.col(k).allFinite());
        REQUIRE(set.h.col(k).squaredNorm() > 0.0);
      }
    }
  }

  TEST_CASE("config validation") {
    ChannelConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.num_antennas = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.distances[2] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.path_loss_exponent = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.noise_variances = {1.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.noise_variances[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("json export lists one [re, im] pair per antenna") {
    Eigen::VectorXcd v(2);
    v << std::complex<double>(1.5, -2.0), std::complex<double>(0.0, 0.25);
    const auto set = noma::make_channel_set({v}, {1.0});
    const auto parsed = nlohmann::json::parse(noma::channels_to_json(set));
    CHECK(parsed == nlohmann::json::parse("[[[1.5, -2.0], [0.0, 0.25]]]"));
  }
}
