#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "uavfl/common.hpp"
#include "uavfl/scenario.hpp"

namespace uavfl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Local training data of one follower; one sample per row of `features`.
struct Dataset {
  Mat features;
  Vec labels;
  int owner = 0;
  int count() const { return static_cast<int>(labels.size()); }
};

struct LossConstants {
  double lipschitz_u = 0.0;  // largest Hessian eigenvalue of F
  double strong_mu = 0.0;    // smallest Hessian eigenvalue of F
  double zeta1 = 0.0;        // ||grad_i||^2 <= zeta1 + zeta2 ||grad F||^2
  double zeta2 = 1.0;
  double optimal_loss = 0.0;  // F(w*)
  Vec w_star;
};

/// Per-sample loss f(w, x, y) plus the aggregate quantities built from it.
/// F_i is the unnormalized sum over follower i's samples and F carries 1/N.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual double sample_loss(const Vec& w, const Vec& x, double y) const = 0;
  virtual Vec sample_gradient(const Vec& w, const Vec& x, double y) const = 0;

  virtual double follower_loss(const Vec& w, const Dataset& data) const;
  virtual Vec follower_gradient(const Vec& w, const Dataset& data) const;

  double total_loss(const Vec& w, std::span<const Dataset> data) const;
  Vec total_gradient(const Vec& w, std::span<const Dataset> data) const;
  /// sum_i sum_n f(w, x_in, y_in), without the 1/N factor.
  double loss_sum(const Vec& w, std::span<const Dataset> data) const;

  const LossConstants& constants() const { return constants_; }
  LossConstants& mutable_constants() { return constants_; }

 protected:
  LossConstants constants_;
};

/// f(w, x, y) = (w^T x - y)^2.
class SquaredLoss final : public LossModel {
 public:
  double sample_loss(const Vec& w, const Vec& x, double y) const override;
  Vec sample_gradient(const Vec& w, const Vec& x, double y) const override;
  double follower_loss(const Vec& w, const Dataset& data) const override;
  Vec follower_gradient(const Vec& w, const Dataset& data) const override;
};

struct RegressionProblem {
  std::vector<Dataset> datasets;
  std::shared_ptr<const LossModel> loss;
  Vec w_true;

  int total_count() const;
  std::vector<int> counts() const;
};

/// Fills mu, U (Hessian eigenvalue extremes), w* and F(w*) for squared loss.
/// Throws Error(kNumeric) when the pooled Gram matrix is singular.
void fit_squared_loss_constants(SquaredLoss& loss, std::span<const Dataset> data);

/// Smallest zeta2 >= 1, then smallest zeta1 >= 0, such that
///   max_i ||grad F_i(w) / N_i||^2 <= zeta1 + zeta2 ||grad F(w)||^2
/// holds on n_points samples drawn uniformly from the ball around w* of radius
/// 3 ||w0 - w*||.
void estimate_zeta(LossModel& loss, std::span<const Dataset> data, const Vec& w0, int n_points,
                   std::uint64_t seed);

/// Gaussian features, labels = x^T w_true + noise; constants fitted, zetas
/// estimated around w0 = 0.
RegressionProblem make_regression_problem(int n_followers, int samples_per, int dim, double noise,
                                          std::uint64_t seed, double feature_scale = 1.0,
                                          double heterogeneity = 0.0);
RegressionProblem make_regression_problem(const SwarmScenario& scenario);

struct FlState {
  Vec global_w;
  std::vector<Vec> local_w;
  std::vector<Vec> held_w;  // last global model each follower received
  int round = 0;
  std::vector<double> loss_history;                // F(w^(t)), t = 0..round
  std::vector<std::vector<bool>> participation_history;  // C_{i,t}, t = 1..round
};

/// w_i = w - (lr / N_i) grad F_i(w), starting from `start`.
Vec local_update(const Vec& start, const Dataset& data, const LossModel& loss, double lr);
Vec local_update(const FlState& state, int i, const Dataset& data, const LossModel& loss, double lr);

/// sum N_i w_i / sum N_i.
Vec aggregate_ideal(std::span<const Vec> local_ws, std::span<const int> counts);

/// Weighted mean over participating followers; previous_global when nobody participates.
Vec aggregate_with_losses(std::span<const Vec> local_ws, std::span<const int> counts,
                          const std::vector<bool>& participation, const Vec& previous_global);

struct FlOptions {
  std::optional<Vec> w0;        // zero vector when unset
  bool stop_at_epsilon = true;  // stop at the first crossing
  /// Replaces the channel with C_{i,t} = 1 for everyone (perfect links).
  bool perfect_links = false;
};

struct FlRun {
  FlState state;
  std::optional<int> empirical_round;  // first t with F(w^(t)) - F* <= epsilon
};

/// Runs delay-gated federated learning with lr = 1/U. Each round draws a
/// channel realization, gates every follower on both delay budgets,
/// trains every follower from the global model it last received, and
/// aggregates the participants.
FlRun run_fl(const SwarmScenario& scenario, const DesignVector& design, const RegressionProblem& problem,
             int max_rounds, double epsilon, std::uint64_t seed, const FlOptions& options = {});

/// e = -grad F(w) + sum_i C_i grad F_i(w) / sum_i N_i C_i, i.e. the deviation of
/// the realized aggregate step from a full gradient step (lr factored out).
Vec aggregation_error(const Vec& w, const RegressionProblem& problem, const std::vector<bool>& participation);

}  // namespace uavfl
