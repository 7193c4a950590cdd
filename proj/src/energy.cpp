#include "uavfl/energy.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace uavfl {

double energy_per_bit(const ComputeParams& c) {
  return c.kappa * c.cycles_per_bit * c.cpu_freq * c.cpu_freq;
}

double training_energy_leader(const ComputeParams& compute, double pkt_local_bits, int n_followers) {
  return energy_per_bit(compute) * pkt_local_bits * n_followers;
}

double training_energy_follower(const ComputeParams& compute, std::span<const double> sample_bits) {
  return energy_per_bit(compute) * std::accumulate(sample_bits.begin(), sample_bits.end(), 0.0);
}

namespace {

// 2A / (q r^2 pi rho)
double thrust_constant(const FlightParams& f) {
  const double thrust = f.mass * f.gravity;
  return 2.0 * thrust / (f.rotors * f.rotor_diameter * f.rotor_diameter * std::numbers::pi * f.air_density);
}

}  // namespace

double hover_induced_velocity(const FlightParams& flight) { return std::sqrt(thrust_constant(flight)); }

double induced_velocity(const FlightParams& flight, double v) {
  if (v < 0.0) throw Error(ErrorKind::kArgument, "induced_velocity: speed must be >= 0");
  const double c = thrust_constant(flight);
  constexpr double kOmega = 0.5;
  constexpr int kMaxIter = 200;

  double vi = std::sqrt(c);
  auto residual = [&](double x) { return std::abs(x * std::sqrt(v * v + x * x) - c); };
  for (int it = 0; it < kMaxIter; ++it) {
    const double next = (1.0 - kOmega) * vi + kOmega * c / std::sqrt(v * v + vi * vi);
    const bool stalled = std::abs(next - vi) <= 1e-15 * std::max(vi, 1.0);
    vi = next;
    if (stalled) break;
  }
  if (!(residual(vi) < 1e-9)) throw Error(ErrorKind::kNumeric, "induced_velocity: fixed point did not converge");
  return vi;
}

double flight_power(const FlightParams& flight, double v) {
  return induced_velocity(flight, v) * flight.mass * flight.gravity / flight.efficiency;
}

double follower_training_energy(const SwarmScenario& s) {
  return energy_per_bit(s.compute) * s.dataset.sample_bits * s.dataset.samples_per_follower;
}

double leader_training_energy(const SwarmScenario& s) {
  return training_energy_leader(s.compute, s.radio.pkt_local, s.n_followers);
}

double round_energy(Role role, int follower, const DesignVector& design, double uplink_delay,
                    const SwarmScenario& s) {
  const double hover = flight_power(s.flight, design.v) * s.round_time;
  if (role == Role::kLeader)
    return leader_training_energy(s) + design.p_leader * s.downlink_budget(design.beta) + hover;
  return follower_training_energy(s) + design.p.at(static_cast<std::size_t>(follower)) * uplink_delay + hover;
}

}  // namespace uavfl
