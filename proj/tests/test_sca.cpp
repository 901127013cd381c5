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
#include <random>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "noma/metrics.hpp"
#include "noma/sca.hpp"
#include "oracles.hpp"

namespace sca = noma::sca;
using noma::BeamformerSet;
using noma::ChannelSet;

namespace {

Eigen::VectorXcd scalar(double v) {
  Eigen::VectorXcd x(1);
  x(0) = v;
  return x;
}

ChannelSet two_user_channel() { return noma::make_channel_set({scalar(1.0), scalar(2.0)}, {1.0, 1.0}); }

ChannelSet default_channel(std::uint64_t seed) {
  noma::ChannelConfig cfg;
  cfg.seed = seed;
  return noma::generate_channels(cfg);
}

double eval_affine(const noma::conic::AffineExpr& e, const std::vector<double>& x) { return e.evaluate(x); }

double soc_tail_norm(const sca::SocRows& soc, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& row : soc.v) s += std::pow(eval_affine(row, x), 2);
  return std::sqrt(s);
}

void check_run_invariants(const sca::RunReport& run, const ChannelSet& h, double budget) {
  for (std::size_t n = 1; n < run.xi_trace.size(); ++n) REQUIRE(run.xi_trace[n] >= run.xi_trace[n - 1] - 1e-6);
  REQUIRE(run.metrics.transmit_power <= budget * (1.0 + 1e-6));
  REQUIRE(noma::check_sic_ordering(run.w, h, 1e-6).ok);
  for (std::size_t i = 0; i < run.slack_rates.size(); ++i) REQUIRE(run.metrics.rates[i] >= run.slack_rates[i] - 1e-4);
  REQUIRE(run.max_expansion_violation <= 1e-8);
}

}  // namespace

TEST_SUITE("sca") {
  TEST_CASE("signal linearization") {
    sca::ScaSettings published;
    published.signal_gradient = sca::SignalGradient::kUnitInterference;
    const sca::ScaSettings taylor;

    const auto a = sca::linearize_signal_constraint(2.0, 3.0, published);
    CHECK(a.evaluate(2.0, 3.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(a.evaluate(2.2, 3.0) == doctest::Approx(3.1).epsilon(1e-12));
    CHECK_FALSE(a.clamped);

    const auto b = sca::linearize_signal_constraint(2.0, 3.0, taylor);
    CHECK(b.evaluate(2.0, 3.0) == doctest::Approx(3.0).epsilon(1e-12));
    // Exact first-order term: eta / (2 sqrt(z - 1)) = 1.5 per unit of z.
    CHECK(b.evaluate(2.2, 3.0) == doctest::Approx(3.3).epsilon(1e-12));
    CHECK(std::sqrt(1.2) * 3.0 == doctest::Approx(3.286).epsilon(1e-3));

    const auto guarded = sca::linearize_signal_constraint(1.0, 3.0, taylor);
    CHECK(guarded.clamped);
    CHECK(std::isfinite(guarded.z_coef));
  }

  TEST_CASE("fairness product linearization") {
    const auto a = sca::linearize_fairness_product(4.0, 2.0);
    CHECK(a.evaluate(4.0, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(a.evaluate(4.0, 2.5) == doctest::Approx(5.0).epsilon(1e-12));
    const auto b = sca::linearize_fairness_product(1.0, 1.0);
    CHECK(b.evaluate(1.21, 1.0) == doctest::Approx(1.105).epsilon(1e-12));
    CHECK(b.evaluate(1.21, 1.0) >= std::sqrt(1.21));
    const auto c = sca::linearize_fairness_product(0.0, 1.0);
    CHECK(c.clamped);
    CHECK(std::isfinite(c.gamma_coef));
  }

  TEST_CASE("SIC tangent") {
    const sca::SicLinearization lin{{1.0, 0.0}};
    CHECK(lin.evaluate({1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(lin.evaluate({2.0, 0.0}) == doctest::Approx(3.0));
    CHECK(lin.evaluate({0.0, 0.0}) == doctest::Approx(-1.0));
  }

  TEST_CASE("tangency at random expansion points") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      const double z = 1.0 + 1e-3 + 10.0 * u(rng);
      const double eta = 1e-2 + 10.0 * u(rng);
      for (auto grad : {sca::SignalGradient::kTaylor, sca::SignalGradient::kUnitInterference}) {
        sca::ScaSettings s;
        s.signal_gradient = grad;
        const auto lin = sca::linearize_signal_constraint(z, eta, s);
        REQUIRE(std::abs(lin.evaluate(z, eta) - std::sqrt(z - 1.0) * eta) <= 1e-10 * (1.0 + std::sqrt(z) * eta));
      }
      const double gamma = 1e-3 + u(rng);
      const double beta = 10.0 * u(rng);
      const auto fl = sca::linearize_fairness_product(gamma, beta);
      REQUIRE(std::abs(fl.evaluate(gamma, beta) - std::sqrt(gamma) * beta) <= 1e-10 * (1.0 + beta));
      const std::complex<double> anchor(g(rng), g(rng));
      const sca::SicLinearization sl{anchor};
      REQUIRE(std::abs(sl.evaluate(anchor) - std::norm(anchor)) <= 1e-10 * (1.0 + std::norm(anchor)));
      const std::complex<double> other(g(rng), g(rng));
      REQUIRE(sl.evaluate(other) <= std::norm(other) + 1e-12);
    }
  }

  TEST_CASE("interference cone of the two-user instance") {
    const auto h = two_user_channel();
    const sca::TradeoffWeights weights{0.5, 2.0};
    const auto state = sca::initialize_feasible(h, 1.0, weights);
    const auto sp = sca::build_subproblem(state, weights, h, 1.0);
    std::vector<double> x(static_cast<std::size_t>(sp.problem.num_variables()), 0.0);
    x[static_cast<std::size_t>(sp.layout.w_re_col(1, 0))] = std::sqrt(0.2);
    const auto soc = sca::interference_soc_constraint(sp.layout, h, 0, 1);
    CHECK(soc.dimension() == 4);
    CHECK(soc_tail_norm(soc, x) == doctest::Approx(std::sqrt(1.8)).epsilon(1e-12));
    CHECK(std::abs(soc_tail_norm(soc, x) - 1.342) < 1e-3);

    const auto last = sca::interference_soc_constraint(sp.layout, h, 1, 1);
    CHECK(last.dimension() == 2);
    CHECK(soc_tail_norm(last, x) == doctest::Approx(1.0));
    std::vector<double> zeros(x.size(), 0.0);
    CHECK(soc_tail_norm(soc, zeros) == doctest::Approx(1.0));
  }

  TEST_CASE("rate norm cone") {
    sca::VariableLayout lay;
    lay.num_users = 4;
    lay.r = {0, 1, 2, 3};
    lay.beta = 4;
    const auto soc = sca::rate_norm_soc_constraint(lay);
    CHECK(soc.dimension() == 5);
    CHECK(soc_tail_norm(soc, {1, 1, 1, 1, 0}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(soc_tail_norm(soc, {0, 0, 0, 0, 0}) == 0.0);
    sca::VariableLayout one;
    one.num_users = 1;
    one.r = {0};
    one.beta = 1;
    CHECK(soc_tail_norm(sca::rate_norm_soc_constraint(one), {0.7, 0}) == doctest::Approx(0.7));
  }

  TEST_CASE("variable count") {
    const auto h = default_channel(1);
    const double budget = 1000.0;
    const sca::TradeoffWeights mid{0.5, 10.0};
    const auto state = sca::initialize_feasible(h, budget, mid);
    CHECK(sca::build_subproblem(state, mid, h, budget).problem.num_variables() == 70);
    const sca::TradeoffWeights srm{0.0, 10.0};
    CHECK(sca::build_subproblem(sca::initialize_feasible(h, budget, srm), srm, h, budget).problem.num_variables() ==
          70 - 3);
    const sca::TradeoffWeights mmr{1.0, 10.0};
    CHECK(sca::build_subproblem(sca::initialize_feasible(h, budget, mmr), mmr, h, budget).problem.num_variables() ==
          70 - 1);
  }

  TEST_CASE("clamped alpha keeps coefficients finite") {
    sca::ScaSettings s;
    CHECK(sca::effective_alpha(1e-9, s) == doctest::Approx(1e-3));
    CHECK(sca::effective_alpha(1.0 - 1e-9, s) == doctest::Approx(1.0 - 1e-3));
    CHECK(sca::effective_alpha(0.0, s) == 0.0);
    CHECK(sca::effective_alpha(1.0, s) == 1.0);
    const auto h = default_channel(2);
    for (double alpha : {1e-9, 1.0 - 1e-9}) {
      const sca::TradeoffWeights w{alpha, 10.0};
      const auto sp = sca::build_subproblem(sca::initialize_feasible(h, 1000.0, w), w, h, 1000.0);
      for (const auto& cone : sp.problem.cones()) {
        for (const auto& row : cone.rows) {
          for (const auto& t : row.terms()) REQUIRE(std::isfinite(t.coefficient));
        }
      }
    }
    CHECK_THROWS_AS(sca::TradeoffWeights({1.5, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(sca::TradeoffWeights({0.5, 0.0}).validate(), std::invalid_argument);
  }

  TEST_CASE("starting point of the two-user instance") {
    const auto h = two_user_channel();
    const auto w = sca::initial_beamformers(h, 1.0);
    CHECK(std::abs(w.w(0, 0) - std::sqrt(0.6)) < 1e-12);
    CHECK(std::abs(w.w(0, 1) - std::sqrt(0.3)) < 1e-12);
    CHECK(noma::transmit_power(w) == doctest::Approx(0.9));
    CHECK(noma::check_sic_ordering(w, h).ok);
  }

  TEST_CASE("starting points are strictly feasible") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto h = default_channel(seed);
      const auto w = sca::initial_beamformers(h, 1000.0);
      REQUIRE(noma::transmit_power(w) <= 0.9 * 1000.0 * (1.0 + 1e-12));
      REQUIRE(noma::check_sic_ordering(w, h).ok);
      REQUIRE(noma::check_sic_ordering(w, h).worst_violation == 0.0);
      const auto state = sca::initialize_feasible(h, 1000.0, {0.5, 10.0});
      for (double z : state.z) REQUIRE(z > 1.0);
    }
  }

  TEST_CASE("slack consistency of the starting point") {
    const auto h = two_user_channel();
    for (double alpha : {0.0, 0.3, 1.0}) {
      const sca::TradeoffWeights weights{alpha, 2.0};
      const auto s = sca::initialize_feasible(h, 1.0, weights);
      const auto m = noma::evaluate(s.w, h);
      // Real positive gains: the restricted slack rates equal the achieved ones.
      for (std::size_t i = 0; i < 2; ++i) CHECK(s.r[i] == doctest::Approx(m.rates[i]).epsilon(1e-12));
      const double expected = (1.0 - alpha) * m.sum_rate / 2.0 + alpha * oracle::jain(s.r);
      CHECK(s.xi == doctest::Approx(expected).epsilon(1e-12));
      CHECK(s.beta == doctest::Approx(std::sqrt(2.0 * (s.r[0] * s.r[0] + s.r[1] * s.r[1]))).epsilon(1e-12));
      CHECK(s.z[0] == doctest::Approx(std::exp2(s.r[0])).epsilon(1e-12));
    }
  }

  TEST_CASE("slack rates never exceed achieved rates") {
    for (auto phase : {sca::SignalPhase::kCommon, sca::SignalPhase::kPerDecoder}) {
      sca::ScaSettings s;
      s.signal_phase = phase;
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto h = default_channel(seed);
        const auto state = sca::initialize_feasible(h, 1000.0, {0.5, 10.0}, s);
        const auto m = noma::evaluate(state.w, h);
        for (std::size_t i = 0; i < state.r.size(); ++i) {
          REQUIRE(state.r[i] <= m.rates[i] + 1e-12);
          if (phase == sca::SignalPhase::kPerDecoder) REQUIRE(state.r[i] == doctest::Approx(m.rates[i]).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("previous iterate is feasible for every built subproblem") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto h = default_channel(seed);
      for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
        const sca::TradeoffWeights w{alpha, 10.0};
        for (auto phase : {sca::SignalPhase::kCommon, sca::SignalPhase::kPerDecoder}) {
          sca::ScaSettings s;
          s.signal_phase = phase;
          const auto state = sca::initialize_feasible(h, 1000.0, w, s);
          const auto sp = sca::build_subproblem(state, w, h, 1000.0, s);
          REQUIRE(sp.problem.max_violation(sp.expansion_point) <= 1e-8);
        }
      }
    }
  }

  TEST_CASE("run invariants on the default geometry") {
    const double budget = 1000.0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const auto h = default_channel(seed);
      const auto utopia = sca::utopia_run(h, budget);
      REQUIRE(utopia.converged);
      check_run_invariants(utopia, h, budget);
      for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
        const auto run = sca::sca_solve(h, {alpha, utopia.metrics.sum_rate}, budget);
        REQUIRE(run.converged);
        check_run_invariants(run, h, budget);
        const auto n = run.xi_trace.size();
        REQUIRE(n >= 2);
        if (!run.stalled) REQUIRE(std::abs(run.xi_trace[n - 1] - run.xi_trace[n - 2]) < 1e-3 * std::abs(run.xi_trace[n - 2]));
        // Each normalized objective term is at most one.
        const double normalized = (1.0 - alpha) * run.metrics.sum_rate / utopia.metrics.sum_rate +
                                  alpha * run.slack_fairness;
        REQUIRE(normalized <= 1.0 + 1e-6 + 0.02);
        REQUIRE(run.metrics.sum_rate <= utopia.metrics.sum_rate * 1.02);
      }
    }
  }

  TEST_CASE("the alternative settings keep the invariants") {
    const double budget = 1000.0;
    const auto h = default_channel(3);
    sca::ScaSettings chord;
    chord.power_of_two = sca::PowerOfTwoEncoding::kChordCap;
    sca::ScaSettings per_decoder;
    per_decoder.signal_phase = sca::SignalPhase::kPerDecoder;
    sca::ScaSettings absolute;
    absolute.stop_rule = sca::StopRule::kAbsolute;
    sca::ScaSettings published;
    published.signal_gradient = sca::SignalGradient::kUnitInterference;
    for (const auto& s : {chord, per_decoder, absolute, published}) {
      const auto run = sca::sca_solve(h, {0.5, 10.0}, budget, s);
      CHECK(run.status != sca::RunStatus::kNumericalFailure);
      check_run_invariants(run, h, budget);
    }
    CHECK(sca::sca_solve(h, {0.5, 10.0}, budget, chord).chord_cap_used);
    CHECK_FALSE(sca::sca_solve(h, {0.5, 10.0}, budget, per_decoder).phase_restricted_signal);
  }

  TEST_CASE("utopia and alpha = 0 agree") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto h = default_channel(seed);
      const auto utopia = sca::utopia_run(h, 1000.0);
      const auto srm = sca::sca_solve(h, {0.0, utopia.metrics.sum_rate}, 1000.0);
      CHECK(srm.metrics.sum_rate == doctest::Approx(utopia.metrics.sum_rate).epsilon(0.02));
      CHECK(sca::utopia_sum_rate(h, 1000.0) == utopia.metrics.sum_rate);
    }
  }

  TEST_CASE("a larger budget does not lower the utopia point") {
    double small = 0.0;
    double large = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto h = default_channel(seed);
      const double a = sca::utopia_sum_rate(h, 100.0);
      const double b = sca::utopia_sum_rate(h, 200.0);
      CHECK(b >= a * 0.98);
      small += a;
      large += b;
    }
    CHECK(large > small);
  }

  TEST_CASE("two-user reduction against the power-split grid") {
    const auto h = two_user_channel();
    for (double budget : {1.0, 10.0}) {
      const auto grid = oracle::two_user_grid(1.0, 2.0, 1.0, budget);
      const auto srm = oracle::best_sum_rate(grid);
      const double f1 = sca::utopia_sum_rate(h, budget);
      CHECK(f1 == doctest::Approx(srm.sum()).epsilon(0.02));
      for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto ref = alpha == 1.0 ? oracle::best_min_rate(grid)
                                      : (alpha == 0.0 ? srm : oracle::best_weighted(grid, alpha, srm.sum()));
        const auto run = alpha == 0.0 ? sca::utopia_run(h, budget) : sca::sca_solve(h, {alpha, f1}, budget);
        CAPTURE(budget);
        CAPTURE(alpha);
        CHECK(run.metrics.sum_rate == doctest::Approx(ref.sum()).epsilon(0.05));
        CHECK(run.metrics.fairness_index == doctest::Approx(ref.fi()).epsilon(0.05));
      }
    }
  }

  TEST_CASE("run report json") {
    const auto h = default_channel(4);
    sca::ScaSettings s;
    s.keep_problem_dumps = true;
    s.max_iterations = 2;
    const auto run = sca::sca_solve(h, {0.5, 10.0}, 1000.0, s);
    const auto j = nlohmann::json::parse(sca::to_json(run));
    CHECK(j["xi_trace"].size() == run.xi_trace.size());
    CHECK(j.contains("beamformers"));
    CHECK(j["problem_dumps"].size() == run.problem_dumps.size());
    CHECK(j["metrics"]["sum_rate"].get<double>() == doctest::Approx(run.metrics.sum_rate));
    CHECK(j["restrictions"]["phase_restricted_signal"].get<bool>());
    const auto slim = nlohmann::json::parse(sca::to_json(run, false));
    CHECK_FALSE(slim.contains("beamformers"));
  }
}
