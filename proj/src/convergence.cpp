#include "uavfl/convergence.hpp"

#include <cmath>
#include <limits>

namespace uavfl {

double convergence_speed(const ConvergenceInputs& in) {
  if (in.success_prob.size() != in.counts.size())
    throw Error(ErrorKind::kArgument, "convergence_speed: one probability per follower required");
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < in.counts.size(); ++i) {
    weighted += in.counts[i] * in.success_prob[i];
    total += in.counts[i];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kArgument, "convergence_speed: total sample count must be positive");
  return weighted * in.mu / (total * in.lipschitz_u);
}

double convergence_round_real(double rho, double epsilon, double initial_loss_sum) {
  if (!(rho > 0.0)) throw Error(ErrorKind::kArgument, "convergence_round: rho <= 0, no finite prediction");
  if (!(rho < 1.0)) throw Error(ErrorKind::kArgument, "convergence_round: rho >= 1 is outside the model");
  if (!(epsilon > 0.0) || !(initial_loss_sum > 0.0))
    throw Error(ErrorKind::kArgument, "convergence_round: epsilon and initial loss must be positive");
  return std::log(epsilon / initial_loss_sum) / std::log1p(-rho);
}

int convergence_round(double rho, double epsilon, double initial_loss_sum) {
  const double x = convergence_round_real(rho, epsilon, initial_loss_sum);
  if (x <= 0.0) return 0;
  // absorb rounding noise on exact powers such as log(0.25)/log(0.5)
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<int>(nearest);
  if (x >= static_cast<double>(std::numeric_limits<int>::max())) return std::numeric_limits<int>::max();
  return static_cast<int>(std::ceil(x));
}

int convergence_round(const ConvergenceInputs& in) {
  return convergence_round(convergence_speed(in), in.epsilon, in.initial_loss_sum);
}

}  // namespace uavfl
