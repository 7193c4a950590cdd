#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uavfl/uavfl.h"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfigError = 2, kInfeasible = 3, kRuntime = 4 };

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  int mc_runs = 0;
  int samples_k = 0;
};

struct Failure {
  uavfl_status status;
};

void check(uavfl_status st) {
  if (st != UAVFL_OK) throw Failure{st};
}

int exit_code(uavfl_status st) {
  switch (st) {
    case UAVFL_OK: return kOk;
    case UAVFL_ERR_CONFIG: return kConfigError;
    case UAVFL_ERR_INFEASIBLE: return kInfeasible;
    case UAVFL_ERR_ARGUMENT: return kUsage;
    default: return kRuntime;
  }
}

using ScenarioPtr = std::unique_ptr<uavfl_scenario, decltype(&uavfl_scenario_free)>;
using DesignPtr = std::unique_ptr<uavfl_design, decltype(&uavfl_design_free)>;
using ResultPtr = std::unique_ptr<uavfl_result, decltype(&uavfl_result_free)>;

ScenarioPtr load(const Common& c) {
  uavfl_scenario* s = nullptr;
  check(c.config.empty() ? uavfl_scenario_default(&s) : uavfl_scenario_load(c.config.c_str(), &s));
  return {s, uavfl_scenario_free};
}

void write_text(const char* text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return;
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::cerr << "uavfl: cannot open " << path << '\n';
    throw Failure{UAVFL_ERR_IO};
  }
  std::fputs(text, f);
  std::fclose(f);
}

void emit(uavfl_result* r, const std::string& path) {
  if (path.empty() || path == "-") {
    char* csv = nullptr;
    check(uavfl_result_to_csv(r, &csv));
    std::fputs(csv, stdout);
    uavfl_string_free(csv);
  } else {
    check(uavfl_result_write_csv(r, path.c_str()));
  }
  double wall = 0.0;
  check(uavfl_result_wall_time(r, &wall));
  std::fprintf(stderr, "uavfl: done in %.2f s\n", wall);
}

const double* data_or_null(const std::vector<double>& v) { return v.empty() ? nullptr : v.data(); }

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Scenario JSON (defaults when omitted)")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Base seed");
  sub->add_option("--out", c.out, "Output CSV path (stdout when omitted)");
  sub->add_option("--mc-runs", c.mc_runs, "Monte Carlo FL repetitions per point")->check(CLI::PositiveNumber);
  sub->add_option("--samples-k", c.samples_k, "SAA sample count K")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning over a UAV swarm: convergence, optimization and experiments"};
  app.require_subcommand(1);

  Common common;
  std::vector<double> eps_list, sigma2_list, bw_list;
  int baseline_draws = 0;
  int max_rounds = 0;
  double epsilon = 0.0;
  std::string trace_out;

  auto* validate = app.add_subcommand("validate-theorem", "Predicted vs. empirical convergence rounds per epsilon");
  add_common(validate, common);
  validate->add_option("--eps", eps_list, "Epsilon list (scenario list when omitted)");

  auto* sweep = app.add_subcommand("sweep-sigma", "Convergence rounds over the (sigma2, bandwidth) grid");
  add_common(sweep, common);
  sweep->add_option("--sigma2", sigma2_list, "Angle-deviation variances");
  sweep->add_option("--bandwidth", bw_list, "Bandwidths [Hz]");

  auto* compare = app.add_subcommand("compare-designs", "Joint design against power-only and scheduling-only");
  add_common(compare, common);
  compare->add_option("--bandwidth", bw_list, "Bandwidths [Hz]");
  compare->add_option("--baseline-draws", baseline_draws, "Random baseline draws per bandwidth")
      ->check(CLI::PositiveNumber);

  auto* optimize = app.add_subcommand("optimize", "Solve for the joint power/scheduling/speed design");
  add_common(optimize, common);
  optimize->add_option("--trace-out", trace_out, "Dual trace CSV path");

  auto* simulate = app.add_subcommand("simulate", "One FL trajectory under the scenario design");
  add_common(simulate, common);
  simulate->add_option("--max-rounds", max_rounds, "Rounds to simulate")->check(CLI::PositiveNumber);
  simulate->add_option("--epsilon", epsilon, "Target loss gap")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    ScenarioPtr scenario = load(common);
    uavfl_result* raw = nullptr;
    if (*validate) {
      check(uavfl_validate_theorem(scenario.get(), nullptr, data_or_null(eps_list), eps_list.size(),
                                   common.mc_runs, common.seed, &raw));
    } else if (*sweep) {
      check(uavfl_sweep_sigma(scenario.get(), nullptr, data_or_null(sigma2_list), sigma2_list.size(),
                              data_or_null(bw_list), bw_list.size(), common.mc_runs, common.seed, &raw));
    } else if (*compare) {
      check(uavfl_compare_designs(scenario.get(), data_or_null(bw_list), bw_list.size(), baseline_draws,
                                  common.samples_k, common.seed, &raw));
    } else if (*optimize) {
      check(uavfl_optimize(scenario.get(), common.samples_k, common.seed, &raw, nullptr));
    } else {
      check(uavfl_simulate(scenario.get(), nullptr, max_rounds, epsilon, common.seed, &raw));
    }
    ResultPtr result{raw, uavfl_result_free};
    emit(result.get(), common.out);
    if (!trace_out.empty()) {
      char* trace = nullptr;
      check(uavfl_result_trace_csv(result.get(), &trace));
      std::unique_ptr<char, decltype(&uavfl_string_free)> guard{trace, uavfl_string_free};
      write_text(trace, trace_out);
    }
  } catch (const Failure& f) {
    const char* msg = uavfl_last_error();
    std::cerr << "uavfl: " << uavfl_status_name(f.status) << (msg && *msg ? ": " : "") << msg << '\n';
    return exit_code(f.status);
  }
  return kOk;
}
