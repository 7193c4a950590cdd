#pragma once

#include <vector>

#include "uavfl/common.hpp"

namespace uavfl {

/// Inputs of the closed-form convergence-round prediction.
struct ConvergenceInputs {
  std::vector<double> success_prob;  // per follower, joint uplink/downlink success
  std::vector<int> counts;           // N_i
  double mu = 0.0;
  double lipschitz_u = 0.0;
  double epsilon = 0.0;
  double initial_loss_sum = 0.0;  // sum_i sum_n f(w0, x_in, y_in)
};

/// rho = sum_i N_i P_i mu / (N U), in [0, mu/U].
double convergence_speed(const ConvergenceInputs& in);

/// Real-valued round count log(eps / L0) / log(1 - rho) before rounding.
/// Throws Error(kArgument) unless 0 < rho < 1.
double convergence_round_real(double rho, double epsilon, double initial_loss_sum);

/// ceil(log_{1-rho}(eps / L0)), clamped below at 0.
int convergence_round(const ConvergenceInputs& in);
int convergence_round(double rho, double epsilon, double initial_loss_sum);

}  // namespace uavfl
