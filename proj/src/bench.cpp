// Copyright 2026 The qpecf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qpecf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qpecf/format.hpp"
#include "qpecf/qpe_sim.hpp"

namespace qpecf {

namespace {

constexpr int kMaxBenchQubits = 16;

struct TrialOutcome {
  double error = 0.0;
  bool ok = false;
};

TrialOutcome run_trial(const OutcomeDistribution& dist, double theta, std::uint64_t shots,
                       std::uint64_t seed, const FitOptions& fit) {
  const ShotHistogram hist = sample_shots(dist, shots, seed);
  try {
    const FitResult result = fit_single(histogram_to_probs(hist), fit);
    return {circular_error(result.phases.front(), theta), true};
  } catch (const FitError&) {
    return {};
  } catch (const SolverError&) {
    return {};
  }
}

struct Cell {
  double theta;
  RegisterSpec spec;
  std::uint64_t shots;
};

BenchRecord aggregate(const Cell& cell, int trials, std::span<const TrialOutcome> outcomes) {
  BenchRecord rec;
  rec.theta_true = cell.theta;
  rec.n = cell.spec.qubits();
  rec.dim = cell.spec.dim();
  rec.shots = cell.shots;
  rec.trials = trials;
  double sq = 0.0;
  double abs = 0.0;
  int used = 0;
  for (const TrialOutcome& o : outcomes) {
    if (!o.ok) {
      ++rec.excluded;
      continue;
    }
    sq += o.error * o.error;
    abs += o.error;
    ++used;
  }
  rec.rmse = used ? std::sqrt(sq / used) : std::nan("");
  rec.mean_abs_error = used ? abs / used : std::nan("");
  rec.crlb_rmse = std::sqrt(crlb_mse(cell.spec, cell.shots));
  rec.ratio = rec.rmse / rec.crlb_rmse;
  const double m = static_cast<double>(rec.dim);
  const double nearest = std::nearbyint(cell.theta * m) / m;
  rec.traditional_error = circular_error(nearest >= 1.0 ? nearest - 1.0 : nearest, cell.theta);
  rec.depth_units = circuit_depth_units(cell.spec);
  rec.valid = used > 0 && rec.excluded * 100 <= trials;
  return rec;
}

std::vector<TrialOutcome> run_trials(const std::vector<Cell>& cells, int trials,
                                     std::uint64_t base_seed, const BenchOptions& options) {
  std::vector<OutcomeDistribution> dists;
  dists.reserve(cells.size());
  for (const Cell& c : cells) {
    dists.push_back(simulate_distribution(c.spec, SimUnitary::eigenstate(c.theta)));
  }
  const auto per_cell = static_cast<std::size_t>(trials);
  std::vector<TrialOutcome> outcomes(cells.size() * per_cell);
  parallel_for(outcomes.size(), options.threads, [&](std::size_t task) {
    const std::size_t c = task / per_cell;
    const std::size_t t = task % per_cell;
    const Cell& cell = cells[c];
    const std::uint64_t seed =
        trial_seed(base_seed, cell.theta, cell.spec.qubits(), cell.shots, t);
    outcomes[task] = run_trial(dists[c], cell.theta, cell.shots, seed, options.fit);
  });
  return outcomes;
}

std::vector<BenchRecord> run_cells(const std::vector<Cell>& cells, int trials,
                                   std::uint64_t base_seed, const BenchOptions& options) {
  const std::vector<TrialOutcome> outcomes = run_trials(cells, trials, base_seed, options);
  const auto per_cell = static_cast<std::size_t>(trials);
  std::vector<BenchRecord> records;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    records.push_back(aggregate(
        cells[c], trials, std::span<const TrialOutcome>(outcomes).subspan(c * per_cell, per_cell)));
  }
  return records;
}

double ols_slope(const std::vector<std::pair<double, double>>& pts) {
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1U, threads), std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

void BenchGrid::validate() const {
  if (phases.empty()) throw DomainError("field 'phases': must not be empty");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (!(phases[i] >= 0.0 && phases[i] < 1.0)) {
      throw DomainError("field 'phases[" + std::to_string(i) + "]': phase must lie in [0, 1)");
    }
  }
  if (n_values.empty()) throw DomainError("field 'n_values': must not be empty");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 1 || n_values[i] > kMaxBenchQubits) {
      throw DomainError("field 'n_values[" + std::to_string(i) + "]': must lie in [1, " +
                        std::to_string(kMaxBenchQubits) + "]");
    }
  }
  if (shot_values.empty()) throw DomainError("field 'shot_values': must not be empty");
  for (std::size_t i = 0; i < shot_values.size(); ++i) {
    if (shot_values[i] < 1) {
      throw DomainError("field 'shot_values[" + std::to_string(i) + "]': must be at least 1");
    }
  }
  if (trials < 1) throw DomainError("field 'trials': must be at least 1");
}

double circular_error(double theta_hat, double theta_true) {
  const double d = std::abs(theta_hat - theta_true);
  const double r = d - std::floor(d);
  return std::min(r, 1.0 - r);
}

std::uint64_t trial_seed(std::uint64_t base_seed, double theta, int n, std::uint64_t shots,
                         std::uint64_t trial) {
  return hash_words({base_seed, std::bit_cast<std::uint64_t>(theta),
                     static_cast<std::uint64_t>(n), shots, trial});
}

BenchRecord run_cell(double theta, const RegisterSpec& spec, std::uint64_t shots, int trials,
                     std::uint64_t base_seed, const BenchOptions& options) {
  BenchGrid grid{{theta}, {spec.qubits()}, {shots}, trials, base_seed};
  grid.validate();
  return run_cells({Cell{theta, spec, shots}}, trials, base_seed, options).front();
}

std::vector<std::optional<double>> run_cell_errors(double theta, const RegisterSpec& spec,
                                                   std::uint64_t shots, int trials,
                                                   std::uint64_t base_seed,
                                                   const BenchOptions& options) {
  BenchGrid grid{{theta}, {spec.qubits()}, {shots}, trials, base_seed};
  grid.validate();
  std::vector<std::optional<double>> errors;
  for (const TrialOutcome& o : run_trials({Cell{theta, spec, shots}}, trials, base_seed, options)) {
    errors.push_back(o.ok ? std::optional<double>(o.error) : std::nullopt);
  }
  return errors;
}

std::vector<BenchRecord> run_grid(const BenchGrid& grid, const BenchOptions& options) {
  grid.validate();
  std::vector<Cell> cells;
  for (double theta : grid.phases) {
    for (int n : grid.n_values) {
      for (std::uint64_t k : grid.shot_values) cells.push_back({theta, RegisterSpec(n), k});
    }
  }
  return run_cells(cells, grid.trials, grid.base_seed, options);
}

ScalingExponents fit_scaling_exponents(std::span<const BenchRecord> records) {
  using Points = std::vector<std::pair<double, double>>;
  std::map<std::pair<double, int>, Points> by_shots;
  std::map<std::pair<double, std::uint64_t>, Points> by_dim;
  std::map<std::pair<double, int>, std::vector<std::size_t>> shots_members;
  std::map<std::pair<double, std::uint64_t>, std::vector<std::size_t>> dim_members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const BenchRecord& r = records[i];
    if (!r.valid || !(r.rmse > 0.0) || !std::isfinite(r.rmse)) continue;
    const double ly = std::log10(r.rmse);
    by_shots[{r.theta_true, r.n}].emplace_back(std::log10(static_cast<double>(r.shots)), ly);
    shots_members[{r.theta_true, r.n}].push_back(i);
    by_dim[{r.theta_true, r.shots}].emplace_back(std::log10(static_cast<double>(r.dim)), ly);
    dim_members[{r.theta_true, r.shots}].push_back(i);
  }

  auto distinct_x = [](const Points& pts) {
    std::set<double> xs;
    for (const auto& p : pts) xs.insert(p.first);
    return xs.size();
  };

  std::set<std::size_t> used;
  auto average_slope = [&](const auto& groups, const auto& members) -> std::optional<double> {
    double total = 0.0;
    int count = 0;
    for (const auto& [key, pts] : groups) {
      if (distinct_x(pts) < 3) continue;
      total += ols_slope(pts);
      ++count;
      for (std::size_t i : members.at(key)) used.insert(i);
    }
    if (count == 0) return std::nullopt;
    return total / count;
  };

  ScalingExponents s;
  s.slope_vs_k = average_slope(by_shots, shots_members);
  s.slope_vs_M = average_slope(by_dim, dim_members);
  if (!s.slope_vs_k && !s.slope_vs_M) {
    throw DomainError("scaling fit needs at least three distinct k or M values at a fixed cell");
  }
  s.cells_used = static_cast<int>(used.size());
  return s;
}

std::vector<PooledRecord> pool_over_phases(std::span<const BenchRecord> records) {
  std::vector<PooledRecord> pooled;
  std::vector<double> sq, abs;
  std::vector<int> used;
  for (const BenchRecord& r : records) {
    auto it = std::find_if(pooled.begin(), pooled.end(), [&](const PooledRecord& p) {
      return p.n == r.n && p.shots == r.shots;
    });
    std::size_t idx;
    if (it == pooled.end()) {
      PooledRecord p;
      p.n = r.n;
      p.dim = r.dim;
      p.shots = r.shots;
      p.crlb_rmse = r.crlb_rmse;
      p.depth_units = r.depth_units;
      pooled.push_back(p);
      sq.push_back(0.0);
      abs.push_back(0.0);
      used.push_back(0);
      idx = pooled.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - pooled.begin());
    }
    const int included = r.trials - r.excluded;
    pooled[idx].trials += r.trials;
    pooled[idx].excluded += r.excluded;
    if (included > 0) {
      sq[idx] += r.rmse * r.rmse * included;
      abs[idx] += r.mean_abs_error * included;
      used[idx] += included;
    }
  }
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    pooled[i].rmse = used[i] ? std::sqrt(sq[i] / used[i]) : std::nan("");
    pooled[i].mean_abs_error = used[i] ? abs[i] / used[i] : std::nan("");
    pooled[i].ratio = pooled[i].rmse / pooled[i].crlb_rmse;
  }
  return pooled;
}

std::string records_to_csv(std::span<const BenchRecord> records) {
  std::ostringstream out;
  out << kBenchCsvHeader << '\n';
  for (const BenchRecord& r : records) {
    out << format_sig12(r.theta_true) << ',' << r.n << ',' << r.dim << ',' << r.shots << ','
        << r.trials << ',' << r.excluded << ',' << format_sig12(r.rmse) << ','
        << format_sig12(r.mean_abs_error) << ',' << format_sig12(r.crlb_rmse) << ','
        << format_sig12(r.ratio) << ',' << format_sig12(r.traditional_error) << ','
        << r.depth_units << '\n';
  }
  return out.str();
}

std::string pooled_to_csv(std::span<const PooledRecord> records) {
  std::ostringstream out;
  out << kPooledCsvHeader << '\n';
  for (const PooledRecord& r : records) {
    out << r.n << ',' << r.dim << ',' << r.shots << ',' << r.trials << ',' << r.excluded << ','
        << format_sig12(r.rmse) << ',' << format_sig12(r.mean_abs_error) << ','
        << format_sig12(r.crlb_rmse) << ',' << format_sig12(r.ratio) << ',' << r.depth_units
        << '\n';
  }
  return out.str();
}

nlohmann::ordered_json scaling_to_json(const ScalingExponents& s) {
  nlohmann::ordered_json doc;
  doc["slope_vs_k"] = s.slope_vs_k ? nlohmann::ordered_json(round_sig12(*s.slope_vs_k)) : nullptr;
  doc["slope_vs_M"] = s.slope_vs_M ? nlohmann::ordered_json(round_sig12(*s.slope_vs_M)) : nullptr;
  doc["cells_used"] = s.cells_used;
  return doc;
}

BenchGrid grid_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DomainError("config: expected a JSON object");
  static const std::set<std::string> known{"phases", "n_values", "shot_values", "trials",
                                           "base_seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw DomainError("field '" + key + "': unknown field");
  }
  for (const auto& key : known) {
    if (!doc.contains(key)) throw DomainError("field '" + key + "': missing");
  }
  auto array_of = [&](const std::string& key) -> const nlohmann::json& {
    const auto& v = doc.at(key);
    if (!v.is_array()) throw DomainError("field '" + key + "': expected an array");
    return v;
  };
  auto as_uint = [](const nlohmann::json& v, const std::string& where) -> std::uint64_t {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    throw DomainError("field '" + where + "': expected a non-negative integer");
  };

  BenchGrid grid;
  const auto& phases = array_of("phases");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string where = "phases[" + std::to_string(i) + "]";
    if (phases[i].is_number()) {
      grid.phases.push_back(phases[i].get<double>());
    } else if (phases[i].is_string()) {
      try {
        grid.phases.push_back(parse_real(phases[i].get<std::string>()));
      } catch (const DomainError& e) {
        throw DomainError("field '" + where + "': " + e.what());
      }
    } else {
      throw DomainError("field '" + where + "': expected a number or \"p/q\" string");
    }
  }
  const auto& ns = array_of("n_values");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto v = as_uint(ns[i], "n_values[" + std::to_string(i) + "]");
    grid.n_values.push_back(static_cast<int>(std::min<std::uint64_t>(v, 1U << 20)));
  }
  const auto& ks = array_of("shot_values");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    grid.shot_values.push_back(as_uint(ks[i], "shot_values[" + std::to_string(i) + "]"));
  }
  const auto trials = as_uint(doc.at("trials"), "trials");
  grid.trials = static_cast<int>(std::min<std::uint64_t>(trials, 1U << 30));
  grid.base_seed = as_uint(doc.at("base_seed"), "base_seed");
  grid.validate();
  return grid;
}

}  // namespace qpecf
