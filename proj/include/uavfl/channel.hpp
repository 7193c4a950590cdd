#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "uavfl/common.hpp"
#include "uavfl/scenario.hpp"

namespace uavfl {

/// cos^2(pi/2 * angle) inside the main lobe, g_min outside.
double antenna_gain_exact(const AntennaPattern& pattern, double total_angle);

/// Piecewise-constant main lobe: section m = floor(|angle| * M) maps to cos^2(pi m / 2M).
double antenna_gain_sectionalized(const AntennaPattern& pattern, double total_angle);

/// One joint random realization for every link of the swarm in one round.
struct ChannelDraw {
  std::vector<double> fading_up;        // h_iL per follower
  std::vector<double> fading_down;      // h_Li per follower
  std::vector<double> fading_int_up;    // per uplink interferer
  std::vector<double> fading_int_down;  // per downlink interferer
  std::vector<double> angle_dev;        // [0] leader, [1..I] followers
  std::vector<bool> active_up;
  std::vector<bool> active_down;

  bool operator==(const ChannelDraw&) const = default;
};

/// Draws ChannelDraw instances from a seeded engine. The order of variates is
/// fixed and independent of the scenario's variances, so two scenarios that
/// differ only in sigma2 see common random numbers.
class ChannelSampler {
 public:
  ChannelSampler(const SwarmScenario& scenario, std::uint64_t seed);
  ChannelDraw next();
  void next(ChannelDraw& out);

 private:
  double rician_power();

  const SwarmScenario* scenario_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  double los_amp_;
  double scatter_amp_;
};

ChannelDraw sample_channel_draw(const SwarmScenario& scenario, std::uint64_t seed);

/// Link budget with transmit power factored out: SINR = p * signal / impairment.
struct LinkBudget {
  double signal = 0.0;      // h * d^-alpha * G_tx * G_rx
  double impairment = 0.0;  // active interference + B * gamma0  [W]
};

LinkBudget uplink_budget(int i, const ChannelDraw& draw, const SwarmScenario& scenario);
LinkBudget downlink_budget(int i, const ChannelDraw& draw, const SwarmScenario& scenario);

/// Shannon-rate transmission time of `bits` over `bandwidth` at transmit power `power`.
double transmission_delay(double bits, double bandwidth, double power, const LinkBudget& link);

double uplink_delay(int i, const ChannelDraw& draw, const DesignVector& design,
                    const SwarmScenario& scenario);
double downlink_delay(int i, const ChannelDraw& draw, const DesignVector& design,
                      const SwarmScenario& scenario);

struct SuccessEstimate {
  std::vector<double> joint;     // P(T_iL <= beta T_r, T_Li <= (1-beta) T_r)
  std::vector<double> uplink;    // marginal P(T_iL <= beta T_r)
  std::vector<double> downlink;  // marginal P(T_Li <= (1-beta) T_r)
  std::vector<double> mean_uplink_delay;  // [s]
  int n_samples = 0;
};

/// Monte Carlo estimate over n_samples joint draws; deterministic given the seed.
SuccessEstimate estimate_success(const DesignVector& design, const SwarmScenario& scenario,
                                 int n_samples, std::uint64_t seed);

/// Joint success probability of follower i alone.
double estimate_success_prob(int i, const DesignVector& design, const SwarmScenario& scenario,
                             int n_samples, std::uint64_t seed);

}  // namespace uavfl
