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

#include "noma/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "report_json.hpp"

namespace noma::experiments {

namespace {

using nlohmann::json;

constexpr double kKeyTol = 1e-12;

bool same(double a, double b) { return std::abs(a - b) <= kKeyTol * std::max(1.0, std::abs(a)); }

struct Scenario {
  double weakest_distance;
  double tx_snr_db;
};

struct Unit {
  Scenario scenario;
  int trial;
};

double max_drop(const std::vector<double>& trace) {
  double drop = 0.0;
  for (std::size_t n = 1; n < trace.size(); ++n) drop = std::max(drop, trace[n - 1] - trace[n]);
  return drop;
}

std::vector<TrialRecord> run_unit(const ExperimentConfig& cfg, const Unit& unit) {
  ChannelConfig channel = cfg.channel;
  channel.seed = cfg.channel.seed + static_cast<std::uint64_t>(unit.trial);
  channel.distances.front() = unit.scenario.weakest_distance;
  const double budget = cfg.power_budget(unit.scenario.tx_snr_db);
  const double mbps = cfg.bandwidth_hz / 1e6;
  const auto settings = cfg.sca_settings();

  std::vector<TrialRecord> out;
  TrialRecord base;
  base.weakest_distance = unit.scenario.weakest_distance;
  base.tx_snr_db = unit.scenario.tx_snr_db;
  base.trial = unit.trial;
  base.seed = channel.seed;
  try {
    const ChannelSet h = generate_channels(channel);
    const auto utopia = sca::utopia_run(h, budget, settings);
    base.f1_max = utopia.f1_max;
    base.utopia_failed = utopia.status == sca::RunStatus::kNumericalFailure || !(utopia.f1_max > 0.0);
    if (cfg.dump_solutions) base.channels = h;
    for (double alpha : cfg.alpha_grid) {
      TrialRecord rec = base;
      rec.alpha = alpha;
      const sca::TradeoffWeights weights{alpha, base.f1_max > 0.0 ? base.f1_max : 1.0};
      const auto report = sca::sca_solve(h, weights, budget, settings);
      rec.sum_rate = report.metrics.sum_rate * mbps;
      rec.fairness_index = report.metrics.fairness_index;
      for (double r : report.metrics.rates) rec.rates.push_back(r * mbps);
      rec.slack_rates = report.slack_rates;
      rec.transmit_power = report.metrics.transmit_power;
      rec.sic_ok = report.metrics.sic_ok;
      rec.iterations = report.iterations;
      rec.status = report.status;
      rec.converged = report.converged;
      rec.stalled = report.stalled;
      rec.z_guard_clamps = report.z_guard_clamps;
      rec.gamma_guard_clamps = report.gamma_guard_clamps;
      rec.chord_cap_used = report.chord_cap_used;
      rec.xi_max_drop = max_drop(report.xi_trace);
      if (cfg.dump_solutions) rec.w = report.w;
      out.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    out.clear();
    for (double alpha : cfg.alpha_grid) {
      TrialRecord rec = base;
      rec.alpha = alpha;
      rec.rates.assign(static_cast<std::size_t>(cfg.channel.num_users), 0.0);
      rec.status = sca::RunStatus::kNumericalFailure;
      rec.error = e.what();
      out.push_back(std::move(rec));
    }
  }
  return out;
}

auto record_key(const TrialRecord& r) { return std::make_tuple(r.weakest_distance, r.tx_snr_db, r.trial, r.alpha); }

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json config_json(const ExperimentConfig& cfg) {
  const char* format = cfg.output_format == OutputFormat::kCsv    ? "csv"
                       : cfg.output_format == OutputFormat::kJson ? "json"
                                                                  : "both";
  return json{{"channel",
               {{"num_antennas", cfg.channel.num_antennas},
                {"num_users", cfg.channel.num_users},
                {"distances", cfg.channel.distances},
                {"path_loss_exponent", cfg.channel.path_loss_exponent},
                {"noise_variances", cfg.channel.noise_variances},
                {"seed", cfg.channel.seed}}},
              {"tx_snr_db", cfg.tx_snr_db},
              {"alpha_grid", cfg.alpha_grid},
              {"weakest_distances", cfg.weakest_distances},
              {"num_trials", cfg.num_trials},
              {"sca",
               {{"threshold", cfg.threshold},
                {"stop_rule", cfg.stop_rule == sca::StopRule::kRelative ? "relative" : "absolute"},
                {"signal_gradient", cfg.signal_gradient == sca::SignalGradient::kTaylor ? "taylor" : "unit_interference"},
                {"signal_phase", cfg.signal_phase == sca::SignalPhase::kCommon ? "common" : "per_decoder"},
                {"max_iterations", cfg.max_iterations}}},
              {"solver", {{"tolerance", cfg.solver_tolerance}}},
              {"bandwidth_hz", cfg.bandwidth_hz},
              {"output", {{"format", format}, {"dump_solutions", cfg.dump_solutions}}}};
}

std::vector<Scenario> scenarios(const SweepResult& result) {
  std::vector<Scenario> out;
  for (const auto& a : result.aggregates) {
    if (out.empty() || !same(out.back().weakest_distance, a.weakest_distance) ||
        !same(out.back().tx_snr_db, a.tx_snr_db)) {
      out.push_back({a.weakest_distance, a.tx_snr_db});
    }
  }
  return out;
}

bool distance_matches(double wanted, double have, const ExperimentConfig& cfg) {
  if (wanted == 0.0) return same(have, cfg.channel.distances.front());
  return same(wanted, have);
}

}  // namespace

const Aggregate& SweepResult::cell(double alpha, double tx_snr_db, double weakest_distance) const {
  for (const auto& a : aggregates) {
    if (same(a.alpha, alpha) && same(a.tx_snr_db, tx_snr_db) &&
        distance_matches(weakest_distance, a.weakest_distance, config)) {
      return a;
    }
  }
  throw std::out_of_range("no aggregate for alpha " + number(alpha) + ", TX-SNR " + number(tx_snr_db));
}

std::vector<Aggregate> aggregate(const std::vector<TrialRecord>& records, int num_users, int& failed_trials) {
  // A trial group is one realization of one scenario; any failure drops the group.
  std::map<std::tuple<double, double, int>, bool> group_failed;
  for (const auto& r : records) {
    auto& f = group_failed[{r.weakest_distance, r.tx_snr_db, r.trial}];
    f = f || r.failed();
  }
  failed_trials = static_cast<int>(std::count_if(group_failed.begin(), group_failed.end(),
                                                 [](const auto& kv) { return kv.second; }));

  std::map<std::tuple<double, double, double>, Aggregate> cells;
  for (const auto& r : records) {
    auto& a = cells[{r.weakest_distance, r.tx_snr_db, r.alpha}];
    a.weakest_distance = r.weakest_distance;
    a.tx_snr_db = r.tx_snr_db;
    a.alpha = r.alpha;
    if (a.rates.empty()) a.rates.assign(static_cast<std::size_t>(num_users), 0.0);
    if (group_failed[{r.weakest_distance, r.tx_snr_db, r.trial}]) continue;
    ++a.trials_used;
    a.sum_rate += r.sum_rate;
    a.fairness_index += r.fairness_index;
    a.iterations += r.iterations;
    for (std::size_t i = 0; i < a.rates.size() && i < r.rates.size(); ++i) a.rates[i] += r.rates[i];
  }
  std::vector<Aggregate> out;
  for (auto& [key, a] : cells) {
    if (a.trials_used > 0) {
      const double n = a.trials_used;
      a.sum_rate /= n;
      a.fairness_index /= n;
      a.iterations /= n;
      for (double& v : a.rates) v /= n;
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      a.sum_rate = a.fairness_index = a.iterations = nan;
      std::fill(a.rates.begin(), a.rates.end(), nan);
    }
    out.push_back(std::move(a));
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& study) {
  cfg.validate();
  std::vector<double> distances = cfg.weakest_distances;
  if (distances.empty()) distances.push_back(cfg.channel.distances.front());

  std::vector<Unit> units;
  for (double d : distances) {
    for (double snr : cfg.tx_snr_db) {
      for (int t = 0; t < cfg.num_trials; ++t) units.push_back({{d, snr}, t});
    }
  }

  std::vector<std::vector<TrialRecord>> results(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next++; u < units.size(); u = next++) results[u] = run_unit(cfg, units[u]);
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto count = std::min<std::size_t>(cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers) : hw,
                                           std::max<std::size_t>(1, units.size()));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  result.study = study;
  result.config = cfg;
  for (auto& group : results) {
    for (auto& r : group) result.records.push_back(std::move(r));
  }
  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return record_key(a) < record_key(b); });
  result.num_records_failed = static_cast<int>(
      std::count_if(result.records.begin(), result.records.end(), [](const TrialRecord& r) { return r.failed(); }));
  result.aggregates = aggregate(result.records, cfg.channel.num_users, result.failed_trials);
  return result;
}

SweepResult run_alpha_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.weakest_distances.clear();
  return run_sweep(c, "alpha_sweep");
}

SweepResult run_power_sweep(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.weakest_distances.clear();
  return run_sweep(c, "power_sweep");
}

SweepResult run_pareto_front(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.weakest_distances.clear();
  return run_sweep(c, "pareto");
}

SweepResult run_distance_table(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  if (c.weakest_distances.empty()) c.weakest_distances = {10.0, 100.0, 1000.0};
  return run_sweep(c, "distance_table");
}

std::vector<FrontPoint> averaged_front(const SweepResult& result, double tx_snr_db, double weakest_distance) {
  std::vector<FrontPoint> front;
  for (const auto& a : result.aggregates) {
    if (!same(a.tx_snr_db, tx_snr_db) || !distance_matches(weakest_distance, a.weakest_distance, result.config)) {
      continue;
    }
    if (a.trials_used == 0) continue;
    front.push_back({a.fairness_index, a.sum_rate, a.alpha});
  }
  std::sort(front.begin(), front.end(), [](const FrontPoint& a, const FrontPoint& b) {
    return std::tie(a.fairness_index, a.alpha) < std::tie(b.fairness_index, b.alpha);
  });
  return front;
}

std::vector<FrontPoint> realization_front(const SweepResult& result, double tx_snr_db, int trial,
                                          double weakest_distance) {
  std::vector<FrontPoint> front;
  for (const auto& r : result.records) {
    if (r.trial != trial || !same(r.tx_snr_db, tx_snr_db) ||
        !distance_matches(weakest_distance, r.weakest_distance, result.config) || r.failed()) {
      continue;
    }
    front.push_back({r.fairness_index, r.sum_rate, r.alpha});
  }
  std::sort(front.begin(), front.end(), [](const FrontPoint& a, const FrontPoint& b) {
    return std::tie(a.fairness_index, a.alpha) < std::tie(b.fairness_index, b.alpha);
  });
  return front;
}

double front_violation_fraction(const std::vector<FrontPoint>& front, double relative_tol) {
  if (front.size() < 2) return 0.0;
  int bad = 0;
  for (std::size_t i = 1; i < front.size(); ++i) {
    const double prev = front[i - 1].sum_rate;
    if (front[i].sum_rate > prev + relative_tol * std::abs(prev)) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(front.size() - 1);
}

std::optional<double> interpolate_sum_rate(const std::vector<FrontPoint>& front, double fi) {
  if (front.empty() || fi < front.front().fairness_index || fi > front.back().fairness_index) return std::nullopt;
  for (std::size_t i = 1; i < front.size(); ++i) {
    const auto& a = front[i - 1];
    const auto& b = front[i];
    if (fi > b.fairness_index) continue;
    const double span = b.fairness_index - a.fairness_index;
    if (span <= 0.0) return std::max(a.sum_rate, b.sum_rate);
    const double w = (fi - a.fairness_index) / span;
    return (1.0 - w) * a.sum_rate + w * b.sum_rate;
  }
  return front.back().sum_rate;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string csv_header(int num_users, bool with_distance) {
  std::string h = with_distance ? "d_1," : "";
  h += "alpha,tx_snr_db,trial,sum_rate,fi";
  for (int i = 1; i <= num_users; ++i) h += ",r_" + std::to_string(i);
  h += ",iters,status";
  return h;
}

std::string to_csv(const SweepResult& result) {
  const bool with_distance = !result.config.weakest_distances.empty();
  std::ostringstream os;
  os << csv_header(result.config.channel.num_users, with_distance) << "\n";
  for (const auto& r : result.records) {
    if (with_distance) os << number(r.weakest_distance) << ",";
    os << number(r.alpha) << "," << number(r.tx_snr_db) << "," << r.trial << "," << number(r.sum_rate) << ","
       << number(r.fairness_index);
    for (double v : r.rates) os << "," << number(v);
    os << "," << r.iterations << "," << (r.utopia_failed ? "utopia_failure" : sca::to_string(r.status)) << "\n";
  }
  return os.str();
}

std::string summary_json(const SweepResult& result, const std::string& generated_at) {
  json out;
  out["study"] = result.study;
  if (!generated_at.empty()) out["generated_at"] = generated_at;
  out["config"] = config_json(result.config);
  out["num_records"] = result.records.size();
  out["failed_records"] = result.num_records_failed;
  out["failed_trials"] = result.failed_trials;
  out["rate_unit"] = "Mbps";

  json cells = json::array();
  for (const auto& a : result.aggregates) {
    cells.push_back({{"d_1", a.weakest_distance},
                     {"tx_snr_db", a.tx_snr_db},
                     {"alpha", a.alpha},
                     {"trials_used", a.trials_used},
                     {"sum_rate", a.sum_rate},
                     {"fairness_index", a.fairness_index},
                     {"rates", a.rates},
                     {"iterations", a.iterations}});
  }
  out["aggregates"] = std::move(cells);

  json fronts = json::array();
  for (const auto& sc : scenarios(result)) {
    const auto front = averaged_front(result, sc.tx_snr_db, sc.weakest_distance);
    json points = json::array();
    std::vector<double> alphas, sums, fis;
    for (const auto& p : front) {
      points.push_back({{"alpha", p.alpha}, {"fairness_index", p.fairness_index}, {"sum_rate", p.sum_rate}});
    }
    for (const auto& a : result.aggregates) {
      if (!same(a.tx_snr_db, sc.tx_snr_db) || !same(a.weakest_distance, sc.weakest_distance) || a.trials_used == 0) {
        continue;
      }
      alphas.push_back(a.alpha);
      sums.push_back(a.sum_rate);
      fis.push_back(a.fairness_index);
    }
    fronts.push_back({{"d_1", sc.weakest_distance},
                      {"tx_snr_db", sc.tx_snr_db},
                      {"points", std::move(points)},
                      {"violation_fraction_1pct", front_violation_fraction(front, 0.01)},
                      {"spearman_sum_rate_alpha", spearman(alphas, sums)},
                      {"spearman_fi_alpha", spearman(alphas, fis)}});
  }
  out["fronts"] = std::move(fronts);
  return out.dump(2) + "\n";
}

std::string solutions_json(const SweepResult& result) {
  json out = json::array();
  for (const auto& r : result.records) {
    json entry{{"d_1", r.weakest_distance}, {"tx_snr_db", r.tx_snr_db}, {"alpha", r.alpha},
               {"trial", r.trial},          {"seed", r.seed},           {"status", sca::to_string(r.status)}};
    if (r.channels) entry["channels"] = json::parse(channels_to_json(*r.channels));
    if (r.w) entry["beamformers"] = detail::beamformers_json(*r.w);
    out.push_back(std::move(entry));
  }
  return out.dump(1) + "\n";
}

std::vector<std::string> write_outputs(const SweepResult& result, const std::string& prefix,
                                       const std::string& generated_at) {
  std::vector<std::string> written;
  auto write = [&written](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
    written.push_back(path);
  };
  const auto fmt = result.config.output_format;
  if (fmt != OutputFormat::kJson) write(prefix + ".csv", to_csv(result));
  if (fmt != OutputFormat::kCsv) write(prefix + ".json", summary_json(result, generated_at));
  if (result.config.dump_solutions) write(prefix + ".solutions.json", solutions_json(result));
  return written;
}

}  // namespace noma::experiments
