#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavfl/common.hpp"

namespace uavfl {

/// Directional antenna of one link endpoint: squared-cosine main lobe, flat side lobe.
struct AntennaPattern {
  double theta_init = 0.0;  // normalized boresight offset
  double sigma2 = 0.0;      // variance of the Gaussian orientation jitter
  double g_min = 0.631;     // side-lobe gain, linear
  int sections = 16;        // resolution of the piecewise-constant approximation
};

enum class GainModel { kExact, kSectionalized };

/// Follower i <-> leader link.
struct LinkGeometry {
  double distance = 20.0;      // [m]
  double theta_follower = 0.0;  // boresight offset of the follower antenna toward the leader
  double theta_leader = 0.0;    // boresight offset of the leader antenna toward the follower
  bool operator==(const LinkGeometry&) const = default;
};

struct Interferer {
  double distance = 300.0;     // [m] to the victim receiver
  double power = 0.5;          // [W]
  double gain_product = 0.398;  // combined tx/rx antenna gain, linear
  double active_prob = 0.5;
  bool operator==(const Interferer&) const = default;
};

struct RadioParams {
  double bw_up = 1e6;           // [Hz]
  double bw_down = 1e6;         // [Hz]
  double noise_psd = 0.0;       // [W/Hz], derived from noise_psd_dbm_hz
  double noise_psd_dbm_hz = -174.0;
  double pkt_local = 8e4;       // [bit]
  double pkt_global = 8e4;      // [bit]
  double rician_k = 10.0;       // linear K-factor
  bool operator==(const RadioParams&) const = default;
};

struct ComputeParams {
  double kappa = 1e-28;
  double cycles_per_bit = 1e3;
  double cpu_freq = 1e9;  // [cycle/s]
  bool operator==(const ComputeParams&) const = default;
};

struct FlightParams {
  int rotors = 4;
  double rotor_diameter = 0.254;  // [m]
  double air_density = 1.225;     // [kg/m^3]
  double efficiency = 0.7;
  double mass = 2.0;              // [kg]
  double gravity = 9.81;          // [m/s^2]
  double v_max = 20.0;            // [m/s]
  bool operator==(const FlightParams&) const = default;
};

struct ControlRequirements {
  std::vector<double> tau;  // downlink delay requirement per follower [s]
  double xi_control = 0.9;
  bool operator==(const ControlRequirements&) const = default;
};

struct EnergyBudget {
  double e_bar = 7000.0;  // [J]
  double xi_leader = 0.9;
  std::vector<double> xi_follower;
  bool operator==(const EnergyBudget&) const = default;
};

/// Synthetic linear-regression workload trained by the swarm.
struct DatasetSpec {
  int samples_per_follower = 40;
  int dim = 5;
  double noise = 0.0;          // label noise standard deviation
  double feature_scale = 1.0;  // standard deviation of the Gaussian features
  double heterogeneity = 0.5;  // spread of per-follower feature scales and label models
  double sample_bits = 8e4;    // storage size of one training sample [bit]
  std::uint64_t seed = 7;
  bool operator==(const DatasetSpec&) const = default;
};

struct OptimizerConfig {
  double c_bar = 50.0;
  int max_iters = 200;
  double step_scale = 0.1;  // a = step_scale * N / K
  int inner_max_cycles = 50;
  double inner_rel_tol = 1e-6;
  bool use_ellipsoid = false;
  bool operator==(const OptimizerConfig&) const = default;
};

struct ExperimentConfig {
  double epsilon = 1e-3;               // target loss gap used by the optimizer
  std::vector<double> epsilon_list;    // sweep for theorem validation
  std::vector<double> sigma2_list;
  std::vector<double> bandwidth_list;  // [Hz]
  int samples_k = 1000;
  int mc_samples = 20000;  // draws per success-probability estimate
  int mc_runs = 100;
  int max_rounds = 5000;
  int baseline_draws = 20;
  std::uint64_t seed = 1;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Complete description of one swarm instance plus experiment settings.
struct SwarmScenario {
  int n_followers = 5;
  std::vector<LinkGeometry> links;
  double pathloss_exp = 2.5;
  double sigma2_leader = 0.05;
  std::vector<double> sigma2_follower;
  double g_min_db = -2.0;
  double g_min = 0.0;  // derived from g_min_db
  GainModel gain_model = GainModel::kExact;
  int sections = 16;
  std::vector<Interferer> interferers_up;
  std::vector<Interferer> interferers_down;
  RadioParams radio;
  double p_max = 0.5;
  double round_time = 0.1;  // T_r [s]
  ComputeParams compute;
  FlightParams flight;
  EnergyBudget energy;
  ControlRequirements control;
  DatasetSpec dataset;
  OptimizerConfig optimizer;
  ExperimentConfig experiment;
  DesignVector design;  // fixed design used by simulate / validate-theorem

  bool operator==(const SwarmScenario&) const = default;

  AntennaPattern follower_antenna(int i) const;
  AntennaPattern leader_antenna(int i) const;
  double uplink_budget(double beta) const { return beta * round_time; }
  double downlink_budget(double beta) const { return (1.0 - beta) * round_time; }
};

double db_to_linear(double db);
double dbm_per_hz_to_watt_per_hz(double dbm);

/// Scenario with every field at its default value (I = 5).
SwarmScenario default_scenario();

/// Parses JSON text. Missing fields take default values; invariant violations
/// raise Error(kConfig) naming every offending field.
SwarmScenario scenario_from_json(const std::string& text);
SwarmScenario load_scenario(const std::string& path);
std::string scenario_to_json(const SwarmScenario& scenario);

/// Recomputes derived fields (linear gains, SI noise) and checks invariants.
void finalize_scenario(SwarmScenario& scenario);

/// Throws Error(kArgument) if the design lies outside the feasible box.
void validate_design(const DesignVector& design, const SwarmScenario& scenario);

}  // namespace uavfl
