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
#include "qpecf/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpecf/bench.hpp"
#include "qpecf/fitter.hpp"
#include "qpecf/format.hpp"
#include "qpecf/pmf_model.hpp"
#include "qpecf/qpe_sim.hpp"

namespace qpecf {

namespace {

// Input/flag problems map to exit code 1; everything thrown after inputs are
// validated maps to 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhaseFlags {
  int n = 0;
  std::string theta;
  std::vector<std::string> components;
  std::string output = "-";
};

struct SimulateFlags {
  PhaseFlags phase;
  std::uint64_t shots = 0;
  std::optional<std::uint64_t> seed;
};

struct FitFlags {
  std::string input;
  int phases = 1;
  std::vector<std::string> starts;
  std::string output = "-";
};

struct FisherFlags {
  int n_min = 1;
  int n_max = 8;
  std::string output = "-";
};

struct BenchFlags {
  std::string config;
  std::string output = "-";
  std::string summary;
  std::string pooled;
  std::optional<unsigned> threads;
};

template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

void add_phase_flags(CLI::App* cmd, PhaseFlags& f) {
  cmd->add_option("--n", f.n, "Recording qubits")->required();
  auto* theta = cmd->add_option("--theta", f.theta, "Eigenphase in revolutions (decimal or p/q)");
  auto* comp = cmd->add_option("--component", f.components,
                               "Mixture component theta:weight (repeatable)");
  theta->excludes(comp);
  comp->excludes(theta);
}

PhaseModel phase_model_from(const PhaseFlags& f) {
  return as_usage([&] {
    if (f.theta.empty() && f.components.empty()) {
      throw DomainError("one of --theta or --component is required");
    }
    if (!f.theta.empty()) return PhaseModel::single(parse_real(f.theta));
    std::vector<PhaseComponent> comps;
    for (const std::string& c : f.components) {
      const auto colon = c.find(':');
      if (colon == std::string::npos) {
        throw DomainError("component '" + c + "' must have the form theta:weight");
      }
      comps.push_back({parse_real(c.substr(0, colon)), parse_real(c.substr(colon + 1))});
    }
    return PhaseModel(std::move(comps));
  });
}

RegisterSpec register_from(int n) {
  return as_usage([&] { return RegisterSpec(n); });
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path + "' for writing");
  file << content;
  if (!file) throw UsageError("failed writing '" + path + "'");
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(file), {});
}

nlohmann::json parse_json(const std::string& text, const std::string& path) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw UsageError(path + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

int cmd_pmf(const PhaseFlags& f, std::ostream& out) {
  const RegisterSpec spec = register_from(f.n);
  const PhaseModel model = phase_model_from(f);
  std::string csv = "y,probability\n";
  for (std::int64_t y = 0; y < spec.dim(); ++y) {
    csv += std::to_string(y) + "," + format_sig12(pmf_multi(spec, model, y)) + "\n";
  }
  write_output(f.output, csv, out);
  return kExitOk;
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  const RegisterSpec spec = register_from(f.phase.n);
  const PhaseModel model = phase_model_from(f.phase);
  if (f.shots == 0) throw UsageError("--shots must be at least 1");
  if (spec.qubits() > 16) throw UsageError("--n must be at most 16 for simulation");
  const std::uint64_t seed = f.seed ? *f.seed : std::random_device{}();
  const OutcomeDistribution dist = simulate_distribution(spec, SimUnitary::from_model(model));
  const ShotHistogram hist = sample_shots(dist, f.shots, seed);
  write_output(f.phase.output, histogram_to_json(hist).dump() + "\n", out);
  return kExitOk;
}

OutcomeDistribution distribution_from_json(const nlohmann::json& doc) {
  return as_usage([&]() -> OutcomeDistribution {
    if (doc.is_object() && doc.contains("counts")) {
      return histogram_to_probs(histogram_from_json(doc));
    }
    const nlohmann::json* probs = nullptr;
    std::optional<int> n;
    if (doc.is_array()) {
      probs = &doc;
    } else if (doc.is_object() && doc.contains("probs")) {
      probs = &doc["probs"];
      if (doc.contains("n")) {
        if (!doc["n"].is_number_integer()) throw DomainError("field 'n' must be an integer");
        n = doc["n"].get<int>();
      }
    } else {
      throw DomainError("input must be a histogram object, {\"probs\": [...]} or an array");
    }
    if (!probs->is_array()) throw DomainError("field 'probs' must be an array");
    std::vector<double> values;
    for (const auto& v : *probs) {
      if (!v.is_number()) throw DomainError("probabilities must be numbers");
      values.push_back(v.get<double>());
    }
    if (!n) {
      int q = 0;
      while ((std::size_t{1} << q) < values.size()) ++q;
      if ((std::size_t{1} << q) != values.size() || q == 0) {
        throw DomainError("probability vector length must be a power of two >= 2");
      }
      n = q;
    }
    return OutcomeDistribution(RegisterSpec(*n), std::move(values));
  });
}

int cmd_fit(const FitFlags& f, std::ostream& out) {
  const nlohmann::json doc = parse_json(read_input(f.input), f.input);
  const OutcomeDistribution dist = distribution_from_json(doc);
  FitOptions options;
  if (f.phases < 1) throw UsageError("--phases must be at least 1");
  std::optional<std::vector<double>> starts;
  if (!f.starts.empty()) {
    if (f.phases < 2) throw UsageError("--start applies to multi-phase fits only");
    starts.emplace();
    for (const auto& s : f.starts) starts->push_back(as_usage([&] { return parse_real(s); }));
  }
  // DomainError here means the request does not fit the data (too many phases, bad starts).
  const FitResult result = as_usage([&] {
    return f.phases == 1 ? fit_single(dist, options) : fit_multi(dist, f.phases, starts, options);
  });
  write_output(f.output, fit_result_to_json(result).dump() + "\n", out);
  return kExitOk;
}

// Fisher information is tabulated with eight decimals.
std::string format_fixed8(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8f", value);
  return buf;
}

int cmd_fisher(const FisherFlags& f, std::ostream& out) {
  if (f.n_min < 1 || f.n_max < f.n_min || f.n_max > 20) {
    throw UsageError("need 1 <= --n-min <= --n-max <= 20");
  }
  std::string csv = "n,M,fisher_information,crlb_rmse\n";
  for (int n = f.n_min; n <= f.n_max; ++n) {
    const RegisterSpec spec(n);
    const double fi = fisher_information(spec);
    csv += std::to_string(n) + "," + std::to_string(spec.dim()) + "," + format_fixed8(fi) + "," +
           format_sig12(std::sqrt(crlb_mse(spec, 1))) + "\n";
  }
  write_output(f.output, csv, out);
  return kExitOk;
}

unsigned threads_from(const std::optional<unsigned>& flag) {
  if (flag) {
    if (*flag == 0) throw UsageError("--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("QPECF_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 1024) {
      throw UsageError("QPECF_THREADS must be an integer in [1, 1024]");
    }
    return static_cast<unsigned>(v);
  }
  return 1;
}

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err) {
  const nlohmann::json doc = parse_json(read_input(f.config), f.config);
  const BenchGrid grid = as_usage([&] {
    try {
      return grid_from_json(doc);
    } catch (const DomainError& e) {
      throw DomainError(f.config + ": " + e.what());
    }
  });
  BenchOptions options;
  options.threads = threads_from(f.threads);

  const std::vector<BenchRecord> records = run_grid(grid, options);
  for (const BenchRecord& r : records) {
    if (!r.valid) {
      err << "warning: cell theta=" << format_sig12(r.theta_true) << " n=" << r.n
          << " k=" << r.shots << " excluded " << r.excluded << " of " << r.trials
          << " trials and is flagged invalid\n";
    }
  }
  write_output(f.output, records_to_csv(records), out);
  if (!f.pooled.empty()) write_output(f.pooled, pooled_to_csv(pool_over_phases(records)), out);
  if (!f.summary.empty()) {
    ScalingExponents s;
    try {
      s = fit_scaling_exponents(records);
    } catch (const DomainError& e) {
      err << "note: " << e.what() << "; scaling slopes reported as null\n";
    }
    write_output(f.summary, scaling_to_json(s).dump() + "\n", out);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curve-fitted quantum phase estimation toolkit", "qpecf"};
  app.require_subcommand(1);

  PhaseFlags pmf_flags;
  auto* pmf = app.add_subcommand("pmf", "Write the analytic outcome distribution as CSV");
  add_phase_flags(pmf, pmf_flags);
  pmf->add_option("--output,-o", pmf_flags.output, "Output path, - for stdout");

  SimulateFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "Simulate the circuit and sample a shot histogram");
  add_phase_flags(sim, sim_flags.phase);
  sim->add_option("--shots", sim_flags.shots, "Number of shots")->required();
  sim->add_option("--seed", sim_flags.seed, "Sampling seed");
  sim->add_option("--output,-o", sim_flags.phase.output, "Output path, - for stdout");

  FitFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit phases to a histogram or probability vector");
  fit->add_option("--input,-i", fit_flags.input, "Histogram or probability JSON, - for stdin")
      ->required();
  fit->add_option("--phases", fit_flags.phases, "Number of eigenphases to fit");
  fit->add_option("--start", fit_flags.starts, "Start phase per component (multi-phase only)");
  fit->add_option("--output,-o", fit_flags.output, "Output path, - for stdout");

  FisherFlags fisher_flags;
  auto* fisher = app.add_subcommand("fisher", "Tabulate per-shot Fisher information");
  fisher->add_option("--n-min", fisher_flags.n_min, "Smallest register size");
  fisher->add_option("--n-max", fisher_flags.n_max, "Largest register size");
  fisher->add_option("--output,-o", fisher_flags.output, "Output path, - for stdout");

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Run a Monte Carlo error campaign");
  bench->add_option("--config,-c", bench_flags.config, "Grid config JSON")->required();
  bench->add_option("--output,-o", bench_flags.output, "Per-cell CSV path, - for stdout");
  bench->add_option("--summary", bench_flags.summary, "Scaling-exponent JSON path");
  bench->add_option("--pooled", bench_flags.pooled, "Phase-pooled CSV path");
  bench->add_option("--threads", bench_flags.threads, "Worker threads (default $QPECF_THREADS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pmf->parsed()) return cmd_pmf(pmf_flags, out);
    if (sim->parsed()) return cmd_simulate(sim_flags, out);
    if (fit->parsed()) return cmd_fit(fit_flags, out);
    if (fisher->parsed()) return cmd_fisher(fisher_flags, out);
    if (bench->parsed()) return cmd_bench(bench_flags, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitUsage;
}

}  // namespace qpecf
