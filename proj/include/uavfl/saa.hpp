#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uavfl/channel.hpp"
#include "uavfl/common.hpp"
#include "uavfl/fl_engine.hpp"
#include "uavfl/scenario.hpp"

namespace uavfl {

/// Sample-average approximation of the chance-constrained joint design:
///
///   max  sum_i sum_k N_i 1(T_u(beta) - T_iL,k) 1(T_d(beta) - T_Li,k)
///   s.t. sum_k 1(Ebar - phi_k E_leader)        >= K xi_L
///        sum_k 1(Ebar - phi_k E_i,k)           >= K xi_i
///        sum_k 1(tau_i - T_Li,k)               >= K xi_C
///
/// The smoothed variant swaps every indicator for a logistic gate whose
/// argument is normalized per row (T_r for delay rows, Ebar for energy rows).
/// Residual rows are ordered [leader energy, follower energy x I, control x I].

/// Logistic surrogate of the indicator 1(r >= 0).
double sigmoid_gate(double r, double c_bar, double normalizer);

struct SmoothingConfig {
  double c_bar = 50.0;
  double delay_scale = 0.1;   // T_r
  double energy_scale = 7000.0;  // Ebar
};

/// K frozen channel realizations with the design-independent part of every
/// link budget precomputed.
struct ScenarioSamples {
  std::vector<ChannelDraw> draws;
  std::vector<std::vector<LinkBudget>> up;    // [k][i]
  std::vector<std::vector<LinkBudget>> down;  // [k][i]
  int size() const { return static_cast<int>(draws.size()); }
};

ScenarioSamples make_samples(const SwarmScenario& scenario, int k, std::uint64_t seed);

/// Everything held fixed while the design varies.
struct SaaProblem {
  const SwarmScenario* scenario = nullptr;
  ScenarioSamples samples;
  SmoothingConfig smoothing;
  std::vector<int> counts;
  double mu = 0.0;
  double lipschitz_u = 0.0;
  double epsilon = 0.0;
  double initial_loss_sum = 0.0;

  int n_followers() const { return static_cast<int>(counts.size()); }
  int n_constraints() const { return 2 * n_followers() + 1; }
  int k() const { return samples.size(); }
};

SaaProblem make_saa_problem(const SwarmScenario& scenario, const RegressionProblem& regression, int samples_k,
                            std::uint64_t seed);

struct SaaTerms {
  double objective = 0.0;
  std::vector<double> residuals;  // length 2I+1; >= 0 means satisfied
  std::vector<double> success;    // per-follower empirical success frequency
  double phi = 0.0;               // convergence round shared by every sample
};

/// Incremental evaluator of the SAA terms at one design. Changing a single
/// coordinate only recomputes the delays that depend on it.
/// Coordinates: [0, I) follower powers, I leader power, I+1 beta, I+2 speed.
class SaaEvaluator {
 public:
  SaaEvaluator(const SaaProblem& problem, bool smoothed);

  void set_design(const DesignVector& design);
  void set_coordinate(int coord, double value);
  const DesignVector& design() const { return design_; }
  double coordinate(int coord) const;
  int n_coordinates() const { return n_ + 3; }

  SaaTerms terms() const;
  double lagrangian(std::span<const double> lambda) const;

 private:
  double gate(double r, double normalizer) const;
  void refresh_uplink(int i);
  void refresh_downlink();
  void refresh_flight();

  const SaaProblem* problem_;
  bool smoothed_;
  int n_;
  int k_;
  DesignVector design_;
  std::vector<double> t_up_;    // [i * K + k]
  std::vector<double> t_down_;  // [i * K + k]
  std::vector<double> ctrl_;    // gate(tau_i - T_Li,k), per follower summed
  double flight_power_ = 0.0;
};

double smoothed_objective(const DesignVector& design, const SaaProblem& problem);
std::vector<double> smoothed_constraints(const DesignVector& design, const SaaProblem& problem);
/// Unsmoothed indicator version of objective and residuals.
SaaTerms indicator_terms(const DesignVector& design, const SaaProblem& problem);
bool passes_saa_constraints(const DesignVector& design, const SaaProblem& problem);

/// J(lambda, design) = smoothed objective + lambda . smoothed residuals.
double lagrangian(const DesignVector& design, std::span<const double> lambda, const SaaProblem& problem);

/// Box of the design variables used by the inner maximization.
struct DesignBox {
  double p_lo, p_hi, beta_lo, beta_hi, v_lo, v_hi;
};
DesignBox design_box(const SwarmScenario& scenario);

struct InnerOptions {
  int max_cycles = 50;
  double rel_tol = 1e-6;
  int grid_points = 16;  // coarse scan before each golden-section refinement
  double x_tol = 1e-7;   // golden-section bracket tolerance relative to the interval
};

struct InnerResult {
  DesignVector design;
  double dual_value = 0.0;  // J at the returned design
  int cycles = 0;
};

/// Cyclic coordinate ascent on J(lambda, .) over the design box; each
/// coordinate gets a coarse scan followed by golden-section refinement, and a
/// move is kept only when it does not decrease J.
InnerResult inner_maximize(std::span<const double> lambda, const SaaProblem& problem, const DesignVector& init,
                           const InnerOptions& options = {});

/// Subgradient of the dual at lambda: the smoothed residuals at the maximizer.
std::vector<double> dual_subgradient(const DesignVector& maximizer, const SaaProblem& problem);

struct DualIterate {
  int iteration = 0;
  double dual_value = 0.0;
  double best_dual = 0.0;
  std::vector<double> lambda;
  std::vector<double> residuals;  // smoothed, at the maximizer
  double indicator_objective = 0.0;
  double min_indicator_margin = 0.0;
  bool feasible = false;
};

struct SolveReport {
  std::vector<DualIterate> trace;
  std::vector<double> final_margins;  // unsmoothed residuals of the returned design
  std::vector<double> success;        // Monte Carlo success probabilities of the returned design
  double rho = 0.0;
  std::string method;
};

struct SolveResult {
  DesignVector design;
  int predicted_round = 0;
  SolveReport report;
};

struct SolveOptions {
  int max_iters = 200;
  double step_scale = 0.1;
  bool use_ellipsoid = false;
  InnerOptions inner;
  int mc_samples = 20000;
};

SolveOptions solve_options(const SwarmScenario& scenario);

/// Minimizes the dual by projected subgradient descent (or a central-cut
/// ellipsoid method) and keeps the inner maximizer with the best smoothed
/// objective among those passing the unsmoothed constraints. Throws
/// Error(kInfeasible) if no iterate passes them.
SolveResult solve(const SwarmScenario& scenario, const RegressionProblem& regression, int samples_k,
                  std::uint64_t seed, const SolveOptions& options);
SolveResult solve(const SaaProblem& problem, std::uint64_t seed, const SolveOptions& options);

enum class BaselineKind { kPowerOnly, kSchedulingOnly };

/// power-only keeps the joint powers and draws beta ~ U(0,1); scheduling-only
/// keeps the joint beta and draws every power ~ U(0, p_max]. Speed is copied.
DesignVector baseline_design(BaselineKind kind, const DesignVector& joint, const SwarmScenario& scenario,
                             std::uint64_t seed);

/// Theorem-based predicted round of a design from Monte Carlo success probabilities.
struct Prediction {
  std::vector<double> success;
  double rho = 0.0;
  int round = 0;  // INT_MAX when rho == 0
};
Prediction predict_round(const DesignVector& design, const SwarmScenario& scenario,
                         const RegressionProblem& regression, double epsilon, int mc_samples, std::uint64_t seed);

}  // namespace uavfl
