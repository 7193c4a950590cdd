#pragma once

#include <span>

#include "uavfl/common.hpp"
#include "uavfl/scenario.hpp"

namespace uavfl {

/// kappa * C * f^2 joules per processed bit.
double energy_per_bit(const ComputeParams& compute);

/// Leader aggregation energy over n_followers local models of pkt_local_bits each.
double training_energy_leader(const ComputeParams& compute, double pkt_local_bits, int n_followers);

/// Follower training energy over its local samples.
double training_energy_follower(const ComputeParams& compute, std::span<const double> sample_bits);

/// Rotor induced velocity at forward speed v (m/s). Solves
///   vi = 2 m g / (q r^2 pi rho sqrt(v^2 + vi^2))
/// by damped fixed-point iteration started from the hover solution.
/// Throws Error(kNumeric) if the iteration cap is hit before the residual
/// drops below 1e-9.
double induced_velocity(const FlightParams& flight, double v);

/// Closed-form induced velocity at hover.
double hover_induced_velocity(const FlightParams& flight);

/// Actual flight power vi * m g / eta at speed v.
double flight_power(const FlightParams& flight, double v);

enum class Role { kLeader, kFollower };

/// Per-round energy of one UAV.
///   leader:     E_L + p_L (1 - beta) T_r + pbar(v) T_r
///   follower i: E_i + p_i T_iL + pbar(v) T_r
/// `uplink_delay` is only read for followers. The leader pays for the whole
/// downlink window while a follower pays for its realized uplink delay.
double round_energy(Role role, int follower, const DesignVector& design, double uplink_delay,
                    const SwarmScenario& scenario);

/// Training energy of follower i under the scenario's dataset settings.
double follower_training_energy(const SwarmScenario& scenario);
double leader_training_energy(const SwarmScenario& scenario);

}  // namespace uavfl
