#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "uavfl/energy.hpp"

using namespace uavfl;

TEST_SUITE("energy") {

TEST_CASE("leader training energy") {
  const ComputeParams c = default_scenario().compute;
  CHECK(energy_per_bit(c) == doctest::Approx(1e-7).epsilon(1e-12));
  CHECK(training_energy_leader(c, 8e4, 5) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(training_energy_leader(c, 8e4, 0) == 0.0);
  ComputeParams fast = c;
  fast.cpu_freq *= 2.0;
  CHECK(training_energy_leader(fast, 8e4, 5) == doctest::Approx(4.0 * training_energy_leader(c, 8e4, 5)));
}

TEST_CASE("follower training energy") {
  const ComputeParams c = default_scenario().compute;
  CHECK(training_energy_follower(c, std::vector<double>{}) == 0.0);
  CHECK(training_energy_follower(c, std::vector<double>{8e4}) == doctest::Approx(0.008).epsilon(1e-12));
  const std::vector<double> a{1e3, 5e4}, b{2e4, 7e2, 9e3};
  std::vector<double> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  CHECK(training_energy_follower(c, ab) ==
        doctest::Approx(training_energy_follower(c, a) + training_energy_follower(c, b)).epsilon(1e-14));
}

TEST_CASE("hover induced velocity matches the closed form") {
  const FlightParams f = default_scenario().flight;
  const double expected = oracle::hover_velocity(2.0, 9.81, 4, 0.254, 1.225);
  CHECK(expected == doctest::Approx(6.29).epsilon(1e-3));
  CHECK(std::abs(induced_velocity(f, 0.0) - expected) < 1e-6);
  CHECK(std::abs(hover_induced_velocity(f) - expected) < 1e-12);
}

TEST_CASE("induced velocity residual on the speed grid") {
  const FlightParams f = default_scenario().flight;
  const double rhs = 2.0 * f.mass * f.gravity / (f.rotors * f.rotor_diameter * f.rotor_diameter * oracle::kPi * f.air_density);
  double prev = std::numeric_limits<double>::infinity();
  for (int v = 0; v <= 20; ++v) {
    const double vi = induced_velocity(f, v);
    CHECK(std::abs(vi * std::sqrt(v * v + vi * vi) - rhs) < 1e-9);
    CHECK(vi < prev);
    prev = vi;
  }
}

TEST_CASE("induced velocity limits and scaling") {
  FlightParams f = default_scenario().flight;
  f.v_max = 1e4;
  double prev = induced_velocity(f, 0.0);
  for (double v : {10.0, 100.0, 1000.0, 10000.0}) {
    const double vi = induced_velocity(f, v);
    CHECK(vi < prev);
    prev = vi;
  }
  CHECK(prev < 0.01);

  FlightParams heavy = default_scenario().flight;
  heavy.mass *= 2.0;
  CHECK(induced_velocity(heavy, 0.0) ==
        doctest::Approx(std::sqrt(2.0) * induced_velocity(default_scenario().flight, 0.0)).epsilon(1e-9));
}

TEST_CASE("flight power") {
  FlightParams f = default_scenario().flight;
  const double a = f.mass * f.gravity;
  CHECK(flight_power(f, 0.0) == doctest::Approx(176.3).epsilon(1e-3));
  CHECK(flight_power(f, 0.0) == doctest::Approx(induced_velocity(f, 0.0) * a / 0.7).epsilon(1e-12));
  f.efficiency = 1.0;
  CHECK(flight_power(f, 7.0) == induced_velocity(f, 7.0) * a);

  const FlightParams g = default_scenario().flight;
  double prev = flight_power(g, 0.0);
  for (double v = 0.25; v <= 20.0; v += 0.25) {
    const double p = flight_power(g, v);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("round energy") {
  SwarmScenario s = default_scenario();
  DesignVector d = s.design;
  d.beta = 0.5;
  d.p_leader = 0.5;
  d.v = 0.0;
  // leader: E_L + p_L T_d(beta) + pbar(0) T_r
  CHECK(round_energy(Role::kLeader, 0, d, 0.0, s) == doctest::Approx(17.7).epsilon(2e-3));
  CHECK(round_energy(Role::kLeader, 0, d, 0.0, s) ==
        doctest::Approx(0.04 + 0.5 * 0.05 + flight_power(s.flight, 0.0) * 0.1).epsilon(1e-12));

  // zero transmit power and compute leaves the flight term
  s.compute.kappa = 0.0;
  d.p_leader = 0.0;
  d.p.assign(5, 0.0);
  d.v = 12.0;
  const double hover = flight_power(s.flight, 12.0) * s.round_time;
  CHECK(round_energy(Role::kLeader, 0, d, 0.0, s) == doctest::Approx(hover).epsilon(1e-14));
  CHECK(round_energy(Role::kFollower, 3, d, 0.01, s) == doctest::Approx(hover).epsilon(1e-14));

  // follower pays for its realized uplink delay
  const SwarmScenario t = default_scenario();
  DesignVector e = t.design;
  const double base = round_energy(Role::kFollower, 1, e, 0.0, t);
  CHECK(round_energy(Role::kFollower, 1, e, 0.02, t) == doctest::Approx(base + e.p[1] * 0.02).epsilon(1e-14));
  CHECK(base == doctest::Approx(follower_training_energy(t) + flight_power(t.flight, e.v) * t.round_time));
  CHECK(follower_training_energy(t) ==
        doctest::Approx(1e-7 * t.dataset.sample_bits * t.dataset.samples_per_follower).epsilon(1e-12));
}

}
