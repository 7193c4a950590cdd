#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "uavfl/common.hpp"
#include "uavfl/fl_engine.hpp"
#include "uavfl/saa.hpp"
#include "uavfl/scenario.hpp"

namespace uavfl {

inline constexpr int kResultSchemaVersion = 1;

struct ExperimentRow {
  std::string experiment;
  int point = 0;
  std::string variant;  // fixed | joint | power-only | scheduling-only | simulate
  double epsilon = 0.0;
  double sigma2 = 0.0;
  double bandwidth = 0.0;  // [Hz], uplink = downlink
  double predicted_phi = 0.0;
  double empirical_mean = 0.0;
  double empirical_std = 0.0;
  int converged_runs = 0;
  double rel_gap = 0.0;  // |pred - emp| / pred
  double rho = 0.0;
  std::vector<double> success;
  DesignVector design;
  double energy_leader = 0.0;        // predicted_phi rounds of leader energy [J]
  double energy_follower_max = 0.0;  // worst follower over predicted_phi rounds [J]
  double reduction_pct = 0.0;        // joint vs this baseline, compare-designs only
};

/// Append-only table of experiment records. Wall time is kept out of the CSV
/// so that identical (config, seed) pairs emit identical bytes.
struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  double wall_time_s = 0.0;
};

/// Runs fn(0..n-1) over a small thread pool; each index owns its output slot.
void parallel_for(int n, const std::function<void(int)>& fn);

/// Mean and sample standard deviation of first-crossing rounds for every
/// epsilon over independent run_fl repetitions. Repetition r uses seed
/// derive_seed(seed, r).
struct EmpiricalRounds {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<int> converged;
};
EmpiricalRounds empirical_rounds(const SwarmScenario& scenario, const DesignVector& design,
                                 const RegressionProblem& problem, const std::vector<double>& eps_list, int mc_runs,
                                 std::uint64_t seed, const FlOptions& options = {});

/// Predicted (closed form) and empirical (simulated) convergence rounds per epsilon.
ExperimentResult experiment_validate_theorem(const SwarmScenario& scenario, const DesignVector& design,
                                             const std::vector<double>& eps_list, int mc_runs, std::uint64_t seed);

/// Predicted and empirical rounds over the (sigma2, bandwidth) grid at the
/// scenario's target epsilon. Every grid point reuses the same channel seeds.
ExperimentResult experiment_sweep_sigma(const SwarmScenario& scenario, const DesignVector& design,
                                        const std::vector<double>& sigma2_list, const std::vector<double>& bw_list,
                                        int mc_runs, std::uint64_t seed);

/// Joint design against both baselines per bandwidth; rows carry reduction
/// percentages relative to the joint design.
ExperimentResult experiment_compare_designs(const SwarmScenario& scenario, const std::vector<double>& bw_list,
                                            int n_baseline_draws, int samples_k, std::uint64_t seed);

/// Runs the optimizer and reports the design plus its dual trace.
struct OptimizeOutcome {
  SolveResult solve;
  ExperimentResult result;  // one "joint" row
};
OptimizeOutcome experiment_optimize(const SwarmScenario& scenario, int samples_k, std::uint64_t seed);

/// One run_fl trajectory: one row per round with the loss gap in `empirical_mean`.
ExperimentResult experiment_simulate(const SwarmScenario& scenario, const DesignVector& design, int max_rounds,
                                     double epsilon, std::uint64_t seed);

/// Scenario copy with sigma2 applied to every UAV.
SwarmScenario with_sigma2(SwarmScenario scenario, double sigma2);
/// Scenario copy with equal uplink/downlink bandwidth.
SwarmScenario with_bandwidth(SwarmScenario scenario, double bandwidth);

std::string csv_header();
std::string to_csv(const ExperimentResult& result);
/// Dual trace of a solve as CSV: iteration, dual value, running best, multipliers, residuals.
std::string trace_to_csv(const SolveReport& report);
void write_text_file(const std::string& path, const std::string& content);
void emit_csv(const ExperimentResult& result, const std::string& path);

}  // namespace uavfl
