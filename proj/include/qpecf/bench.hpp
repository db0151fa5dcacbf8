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
/**
 * @file
 * Monte Carlo error campaigns: RMSE of the fitted phase over repeated seeded
 * trials on a (phase, n, k) grid, compared against the Cramér-Rao bound and the
 * bin-resolution estimate, plus log-log scaling exponents.
 *
 * Every trial draws from its own generator seeded by
 * trial_seed(base_seed, theta, n, k, trial), so results do not depend on how
 * trials are scheduled across threads.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpecf/fitter.hpp"
#include "qpecf/pmf_model.hpp"

namespace qpecf {

struct BenchGrid {
  std::vector<double> phases;
  std::vector<int> n_values;
  std::vector<std::uint64_t> shot_values;
  int trials = 100;
  std::uint64_t base_seed = 0;

  /// Throws DomainError naming the offending field.
  void validate() const;
};

struct BenchRecord {
  double theta_true = 0.0;
  int n = 0;
  std::int64_t dim = 0;
  std::uint64_t shots = 0;
  int trials = 0;
  int excluded = 0;
  double rmse = 0.0;
  double mean_abs_error = 0.0;
  double crlb_rmse = 0.0;
  double ratio = 0.0;
  double traditional_error = 0.0;
  std::int64_t depth_units = 0;
  /// False when more than 1% of trials were excluded for fit errors.
  bool valid = true;

  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

struct BenchOptions {
  unsigned threads = 1;
  FitOptions fit{};
};

/// Distance on the unit circle, min(|d|, 1 - |d|).
double circular_error(double theta_hat, double theta_true);

std::uint64_t trial_seed(std::uint64_t base_seed, double theta, int n, std::uint64_t shots,
                         std::uint64_t trial);

/// Runs `trials` sample-and-fit repetitions of one grid cell.
/// Calls body(i) for every i in [0, count) on up to `threads` workers. Each index runs
/// exactly once; the first exception thrown by body is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

BenchRecord run_cell(double theta, const RegisterSpec& spec, std::uint64_t shots, int trials,
                     std::uint64_t base_seed, const BenchOptions& options = {});

/// All cells in phases x n_values x shot_values order.
/// Per-trial circular errors of one cell, in trial order; nullopt marks an excluded trial.
std::vector<std::optional<double>> run_cell_errors(double theta, const RegisterSpec& spec,
                                                   std::uint64_t shots, int trials,
                                                   std::uint64_t base_seed,
                                                   const BenchOptions& options = {});

std::vector<BenchRecord> run_grid(const BenchGrid& grid, const BenchOptions& options = {});

struct ScalingExponents {
  std::optional<double> slope_vs_k;
  std::optional<double> slope_vs_M;
  int cells_used = 0;
};

/// OLS slopes of log10(rmse) against log10(k) at fixed (theta, n) and against
/// log10(M) at fixed (theta, k), averaged over the groups that span at least three
/// distinct values. Records with zero or non-finite RMSE, or flagged invalid, are
/// skipped. Throws DomainError when neither axis has enough span.
ScalingExponents fit_scaling_exponents(std::span<const BenchRecord> records);

/// Records pooled over phases per (n, k): RMSE over all included trials.
struct PooledRecord {
  int n = 0;
  std::int64_t dim = 0;
  std::uint64_t shots = 0;
  int trials = 0;
  int excluded = 0;
  double rmse = 0.0;
  double mean_abs_error = 0.0;
  double crlb_rmse = 0.0;
  double ratio = 0.0;
  std::int64_t depth_units = 0;
};

std::vector<PooledRecord> pool_over_phases(std::span<const BenchRecord> records);

inline constexpr const char* kBenchCsvHeader =
    "theta_true,n,M,k,trials,excluded,rmse,mean_abs_error,crlb_rmse,ratio,traditional_error,"
    "depth_units";
inline constexpr const char* kPooledCsvHeader =
    "n,M,k,trials,excluded,rmse,mean_abs_error,crlb_rmse,ratio,depth_units";

std::string records_to_csv(std::span<const BenchRecord> records);
std::string pooled_to_csv(std::span<const PooledRecord> records);
nlohmann::ordered_json scaling_to_json(const ScalingExponents& s);

/// Parses {"phases", "n_values", "shot_values", "trials", "base_seed"}. Phases may be
/// numbers or "p/q" strings. Throws DomainError naming the offending field.
BenchGrid grid_from_json(const nlohmann::json& doc);

}  // namespace qpecf
