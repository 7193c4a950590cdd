#include "uavfl/fl_engine.hpp"

#include <cmath>
#include <random>

#include "uavfl/channel.hpp"

namespace uavfl {

double LossModel::follower_loss(const Vec& w, const Dataset& data) const {
  double sum = 0.0;
  for (int n = 0; n < data.count(); ++n) sum += sample_loss(w, data.features.row(n).transpose(), data.labels(n));
  return sum;
}

Vec LossModel::follower_gradient(const Vec& w, const Dataset& data) const {
  Vec g = Vec::Zero(w.size());
  for (int n = 0; n < data.count(); ++n) g += sample_gradient(w, data.features.row(n).transpose(), data.labels(n));
  return g;
}

double LossModel::loss_sum(const Vec& w, std::span<const Dataset> data) const {
  double sum = 0.0;
  for (const auto& d : data) sum += follower_loss(w, d);
  return sum;
}

double LossModel::total_loss(const Vec& w, std::span<const Dataset> data) const {
  int n = 0;
  for (const auto& d : data) n += d.count();
  return loss_sum(w, data) / n;
}

Vec LossModel::total_gradient(const Vec& w, std::span<const Dataset> data) const {
  Vec g = Vec::Zero(w.size());
  int n = 0;
  for (const auto& d : data) {
    g += follower_gradient(w, d);
    n += d.count();
  }
  return g / n;
}

double SquaredLoss::sample_loss(const Vec& w, const Vec& x, double y) const {
  const double r = w.dot(x) - y;
  return r * r;
}

Vec SquaredLoss::sample_gradient(const Vec& w, const Vec& x, double y) const {
  return 2.0 * (w.dot(x) - y) * x;
}

double SquaredLoss::follower_loss(const Vec& w, const Dataset& data) const {
  return (data.features * w - data.labels).squaredNorm();
}

Vec SquaredLoss::follower_gradient(const Vec& w, const Dataset& data) const {
  return 2.0 * data.features.transpose() * (data.features * w - data.labels);
}

int RegressionProblem::total_count() const {
  int n = 0;
  for (const auto& d : datasets) n += d.count();
  return n;
}

std::vector<int> RegressionProblem::counts() const {
  std::vector<int> out;
  for (const auto& d : datasets) out.push_back(d.count());
  return out;
}

void fit_squared_loss_constants(SquaredLoss& loss, std::span<const Dataset> data) {
  const auto dim = data.front().features.cols();
  Mat gram = Mat::Zero(dim, dim);
  Vec xty = Vec::Zero(dim);
  int n = 0;
  for (const auto& d : data) {
    gram += d.features.transpose() * d.features;
    xty += d.features.transpose() * d.labels;
    n += d.count();
  }
  const Mat hessian = 2.0 / n * gram;
  Eigen::SelfAdjointEigenSolver<Mat> eig(hessian);
  const Vec& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(ev.maxCoeff(), 1.0)))
    throw Error(ErrorKind::kNumeric, "regression problem: pooled Gram matrix is singular");

  LossConstants& c = loss.mutable_constants();
  c.strong_mu = ev.minCoeff();
  c.lipschitz_u = ev.maxCoeff();
  c.w_star = gram.ldlt().solve(xty);
  c.optimal_loss = loss.total_loss(c.w_star, data);
}

void estimate_zeta(LossModel& loss, std::span<const Dataset> data, const Vec& w0, int n_points,
                   std::uint64_t seed) {
  LossConstants& c = loss.mutable_constants();
  const auto dim = w0.size();
  const double radius = 3.0 * (w0 - c.w_star).norm();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;

  double zeta1 = 0.0;
  for (int k = 0; k < n_points; ++k) {
    Vec dir(dim);
    for (Eigen::Index j = 0; j < dim; ++j) dir(j) = normal(rng);
    const double r = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
    const Vec w = c.w_star + r * dir / std::max(dir.norm(), 1e-300);
    const double full = loss.total_gradient(w, data).squaredNorm();
    double worst = 0.0;
    for (const auto& d : data) worst = std::max(worst, (loss.follower_gradient(w, d) / d.count()).squaredNorm());
    zeta1 = std::max(zeta1, worst - full);
  }
  c.zeta2 = 1.0;
  c.zeta1 = zeta1;
}

RegressionProblem make_regression_problem(int n_followers, int samples_per, int dim, double noise,
                                          std::uint64_t seed, double feature_scale, double heterogeneity) {
  if (n_followers < 1 || dim < 1 || samples_per < dim)
    throw Error(ErrorKind::kArgument, "make_regression_problem: need n_followers >= 1, dim >= 1, samples_per >= dim");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  RegressionProblem problem;
  problem.w_true.resize(dim);
  for (int j = 0; j < dim; ++j) problem.w_true(j) = normal(rng);
  for (int i = 0; i < n_followers; ++i) {
    Dataset d;
    d.owner = i;
    d.features.resize(samples_per, dim);
    d.labels.resize(samples_per);
    // follower-specific per-dimension feature scales and label model
    Vec scale(dim), w_i(dim);
    for (int j = 0; j < dim; ++j) scale(j) = feature_scale * std::exp(heterogeneity * normal(rng));
    for (int j = 0; j < dim; ++j) w_i(j) = problem.w_true(j) + heterogeneity * normal(rng);
    for (int n = 0; n < samples_per; ++n) {
      for (int j = 0; j < dim; ++j) d.features(n, j) = scale(j) * normal(rng);
      d.labels(n) = d.features.row(n).dot(w_i) + noise * normal(rng);
    }
    problem.datasets.push_back(std::move(d));
  }
  auto loss = std::make_shared<SquaredLoss>();
  fit_squared_loss_constants(*loss, problem.datasets);
  estimate_zeta(*loss, problem.datasets, Vec::Zero(dim), 1000, mix_seed(seed));
  problem.loss = std::move(loss);
  return problem;
}

RegressionProblem make_regression_problem(const SwarmScenario& s) {
  return make_regression_problem(s.n_followers, s.dataset.samples_per_follower, s.dataset.dim, s.dataset.noise,
                                 s.dataset.seed, s.dataset.feature_scale, s.dataset.heterogeneity);
}

Vec local_update(const Vec& start, const Dataset& data, const LossModel& loss, double lr) {
  return start - (lr / data.count()) * loss.follower_gradient(start, data);
}

Vec local_update(const FlState& state, int i, const Dataset& data, const LossModel& loss, double lr) {
  return local_update(state.held_w.at(static_cast<std::size_t>(i)), data, loss, lr);
}

Vec aggregate_ideal(std::span<const Vec> local_ws, std::span<const int> counts) {
  if (local_ws.empty()) throw Error(ErrorKind::kArgument, "aggregate_ideal: need at least one follower");
  Vec sum = Vec::Zero(local_ws.front().size());
  double total = 0.0;
  for (std::size_t i = 0; i < local_ws.size(); ++i) {
    sum += counts[i] * local_ws[i];
    total += counts[i];
  }
  return sum / total;
}

Vec aggregate_with_losses(std::span<const Vec> local_ws, std::span<const int> counts,
                          const std::vector<bool>& participation, const Vec& previous_global) {
  Vec sum = Vec::Zero(previous_global.size());
  double total = 0.0;
  for (std::size_t i = 0; i < local_ws.size(); ++i) {
    if (!participation[i]) continue;
    sum += counts[i] * local_ws[i];
    total += counts[i];
  }
  if (total == 0.0) return previous_global;
  return sum / total;
}

FlRun run_fl(const SwarmScenario& scenario, const DesignVector& design, const RegressionProblem& problem,
             int max_rounds, double epsilon, std::uint64_t seed, const FlOptions& options) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kArgument, "run_fl: epsilon must be > 0");
  validate_design(design, scenario);
  const LossModel& loss = *problem.loss;
  const LossConstants& k = loss.constants();
  const double lr = 1.0 / k.lipschitz_u;
  const auto n = problem.datasets.size();
  const std::vector<int> counts = problem.counts();
  const double t_up = scenario.uplink_budget(design.beta);
  const double t_down = scenario.downlink_budget(design.beta);

  FlRun run;
  FlState& st = run.state;
  st.global_w = options.w0 ? *options.w0 : Vec::Zero(problem.w_true.size());
  st.held_w.assign(n, st.global_w);
  st.local_w.assign(n, st.global_w);
  st.loss_history.push_back(loss.total_loss(st.global_w, problem.datasets));
  if (st.loss_history.back() - k.optimal_loss <= epsilon) {
    run.empirical_round = 0;
    if (options.stop_at_epsilon) return run;
  }

  ChannelSampler sampler(scenario, seed);
  ChannelDraw draw;
  std::vector<bool> participate(n), received(n);
  for (int t = 1; t <= max_rounds; ++t) {
    sampler.next(draw);
    for (std::size_t i = 0; i < n; ++i) {
      const int ii = static_cast<int>(i);
      const bool up = options.perfect_links || uplink_delay(ii, draw, design, scenario) <= t_up;
      received[i] = options.perfect_links || downlink_delay(ii, draw, design, scenario) <= t_down;
      participate[i] = up && received[i];
      st.local_w[i] = local_update(st.held_w[i], problem.datasets[i], loss, lr);
    }
    st.global_w = aggregate_with_losses(st.local_w, counts, participate, st.global_w);
    for (std::size_t i = 0; i < n; ++i)
      if (received[i]) st.held_w[i] = st.global_w;
    st.round = t;
    st.participation_history.push_back(participate);
    st.loss_history.push_back(loss.total_loss(st.global_w, problem.datasets));
    if (!run.empirical_round && st.loss_history.back() - k.optimal_loss <= epsilon) {
      run.empirical_round = t;
      if (options.stop_at_epsilon) break;
    }
  }
  return run;
}

Vec aggregation_error(const Vec& w, const RegressionProblem& problem, const std::vector<bool>& participation) {
  const LossModel& loss = *problem.loss;
  const Vec full = loss.total_gradient(w, problem.datasets);
  Vec sum = Vec::Zero(w.size());
  double total = 0.0;
  for (std::size_t i = 0; i < problem.datasets.size(); ++i) {
    if (!participation[i]) continue;
    sum += loss.follower_gradient(w, problem.datasets[i]);
    total += problem.datasets[i].count();
  }
  if (total == 0.0) return -full;
  return sum / total - full;
}

}  // namespace uavfl
