#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "uavfl/channel.hpp"
#include "uavfl/fl_engine.hpp"

using namespace uavfl;

namespace {

Dataset make_dataset(std::initializer_list<std::initializer_list<double>> xs, std::initializer_list<double> ys) {
  Dataset d;
  const auto rows = static_cast<Eigen::Index>(xs.size());
  const auto cols = static_cast<Eigen::Index>(xs.begin()->size());
  d.features.resize(rows, cols);
  Eigen::Index r = 0;
  for (const auto& row : xs) {
    Eigen::Index c = 0;
    for (double v : row) d.features(r, c++) = v;
    ++r;
  }
  d.labels = Eigen::Map<const Vec>(ys.begin(), static_cast<Eigen::Index>(ys.size()));
  return d;
}

Vec vec(std::initializer_list<double> v) { return Eigen::Map<const Vec>(v.begin(), static_cast<Eigen::Index>(v.size())); }

SwarmScenario perfect_scenario() {
  SwarmScenario s = default_scenario();
  s.interferers_up.clear();
  s.interferers_down.clear();
  s.radio.noise_psd_dbm_hz = -300.0;
  s.sigma2_leader = 0.0;
  s.sigma2_follower.assign(5, 0.0);
  finalize_scenario(s);
  return s;
}

}  // namespace

TEST_SUITE("fl_engine") {

TEST_CASE("scalar squared loss constants") {
  SquaredLoss loss;
  std::vector<Dataset> data{make_dataset({{1.0}}, {1.0})};
  fit_squared_loss_constants(loss, data);
  const auto& c = loss.constants();
  CHECK(c.w_star(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(c.optimal_loss) < 1e-14);
  CHECK(c.strong_mu == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(c.lipschitz_u == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fitted constants agree with the Jacobi oracle") {
  const RegressionProblem p = make_regression_problem(4, 30, 6, 0.1, 11, 1.0, 0.5);
  const auto& c = p.loss->constants();
  const int n = p.total_count();
  std::vector<std::vector<double>> h(6, std::vector<double>(6, 0.0));
  for (const auto& d : p.datasets)
    for (Eigen::Index r = 0; r < d.features.rows(); ++r)
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) h[a][b] += 2.0 * d.features(r, a) * d.features(r, b) / n;
  const std::vector<double> eig = oracle::jacobi_eigenvalues(h);
  CHECK(std::abs(c.strong_mu - eig.front()) < 1e-8);
  CHECK(std::abs(c.lipschitz_u - eig.back()) < 1e-8);
  CHECK(c.strong_mu > 0.0);
  CHECK(c.strong_mu <= c.lipschitz_u);
  CHECK(c.zeta1 >= 0.0);
  CHECK(c.zeta2 >= 1.0);

  // normal equations solved independently
  std::vector<double> rhs(6, 0.0);
  for (const auto& d : p.datasets)
    for (Eigen::Index r = 0; r < d.features.rows(); ++r)
      for (int a = 0; a < 6; ++a) rhs[a] += 2.0 * d.features(r, a) * d.labels(r) / n;
  const std::vector<double> w = oracle::solve_linear(h, rhs);
  for (int a = 0; a < 6; ++a) CHECK(std::abs(w[a] - c.w_star(a)) < 1e-8);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 20; ++k) {
    Vec x(6);
    for (int j = 0; j < 6; ++j) x(j) = c.w_star(j) + normal(rng);
    CHECK(p.loss->total_loss(c.w_star, p.datasets) <= p.loss->total_loss(x, p.datasets));
  }
  CHECK(p.loss->total_loss(c.w_star, p.datasets) == doctest::Approx(c.optimal_loss).epsilon(1e-10));
}

TEST_CASE("loss sums and scaling") {
  SquaredLoss loss;
  const Dataset a = make_dataset({{1.0, 0.0}, {0.0, 2.0}}, {1.0, 1.0});
  const Dataset b = make_dataset({{1.0, 1.0}}, {0.0});
  const std::vector<Dataset> data{a, b};
  const Vec w = vec({1.0, 1.0});
  // (1-1)^2 + (2-1)^2 + (2-0)^2 = 5
  CHECK(loss.loss_sum(w, data) == doctest::Approx(5.0));
  CHECK(loss.total_loss(w, data) == doctest::Approx(5.0 / 3.0));
  CHECK(loss.follower_loss(w, a) == doctest::Approx(1.0));
  const Vec g = loss.follower_gradient(w, a);
  CHECK(g(0) == doctest::Approx(0.0));
  CHECK(g(1) == doctest::Approx(4.0));
  const Vec gt = loss.total_gradient(w, data);
  CHECK(gt(0) == doctest::Approx(4.0 / 3.0));
  CHECK(gt(1) == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("local update") {
  SquaredLoss loss;
  const Dataset d = make_dataset({{2.0}}, {1.0});
  // gradient 2 * 2 * (0 - 1) = -4, step 0.1
  CHECK(local_update(vec({0.0}), d, loss, 0.1)(0) == doctest::Approx(0.4));
  // zero gradient leaves the model unchanged
  CHECK(local_update(vec({0.5}), d, loss, 0.1)(0) == doctest::Approx(0.5));
  // identical datasets give identical models
  const Dataset e = make_dataset({{1.0, 2.0}, {3.0, -1.0}}, {0.5, 2.0});
  const Vec w = vec({0.3, -0.2});
  CHECK((local_update(w, e, loss, 0.05) - local_update(w, e, loss, 0.05)).norm() == 0.0);
}

TEST_CASE("aggregation") {
  const std::vector<Vec> two{vec({0.0}), vec({2.0})};
  CHECK(aggregate_ideal(two, std::vector<int>{1, 1})(0) == doctest::Approx(1.0));
  const std::vector<Vec> weighted{vec({0.0}), vec({4.0})};
  CHECK(aggregate_ideal(weighted, std::vector<int>{1, 3})(0) == doctest::Approx(3.0));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> count(1, 50);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec> ws(4, Vec(3));
    std::vector<int> n(4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) ws[i](j) = normal(rng);
      n[i] = count(rng);
    }
    const Vec agg = aggregate_ideal(ws, n);
    for (int j = 0; j < 3; ++j) {
      double lo = ws[0](j), hi = ws[0](j);
      for (const auto& w : ws) lo = std::min(lo, w(j)), hi = std::max(hi, w(j));
      CHECK(agg(j) >= lo - 1e-12);
      CHECK(agg(j) <= hi + 1e-12);
    }
  }

  const Vec prev = vec({7.0});
  CHECK(aggregate_with_losses(two, std::vector<int>{1, 1}, {false, false}, prev)(0) == 7.0);
  CHECK(aggregate_with_losses(two, std::vector<int>{1, 1}, {false, true}, prev)(0) == 2.0);
  CHECK(aggregate_with_losses(weighted, std::vector<int>{1, 3}, {true, true}, prev)(0) == doctest::Approx(3.0));
}

TEST_CASE("per-round contraction under perfect links") {
  const SwarmScenario s = perfect_scenario();
  const RegressionProblem p = make_regression_problem(s);
  const auto& c = p.loss->constants();
  FlOptions opt;
  opt.perfect_links = true;
  opt.stop_at_epsilon = false;
  const FlRun run = run_fl(s, s.design, p, 200, 1e-300, 9, opt);
  REQUIRE(run.state.loss_history.size() == 201);
  const double factor = 1.0 - c.strong_mu / c.lipschitz_u;
  for (std::size_t t = 1; t < run.state.loss_history.size(); ++t) {
    const double prev = run.state.loss_history[t - 1] - c.optimal_loss;
    const double cur = run.state.loss_history[t] - c.optimal_loss;
    CHECK(cur <= factor * prev + 1e-12 * std::abs(prev) + 1e-15);
  }
}

TEST_CASE("epsilon above the initial gap stops at round zero") {
  const SwarmScenario s = default_scenario();
  const RegressionProblem p = make_regression_problem(s);
  const double gap0 = p.loss->total_loss(Vec::Zero(s.dataset.dim), p.datasets) - p.loss->constants().optimal_loss;
  const FlRun run = run_fl(s, s.design, p, 100, gap0 * 1.01, 3);
  REQUIRE(run.empirical_round.has_value());
  CHECK(*run.empirical_round == 0);
  CHECK(run.state.round == 0);
}

TEST_CASE("run_fl is deterministic") {
  const SwarmScenario s = default_scenario();
  const RegressionProblem p = make_regression_problem(s);
  const FlRun a = run_fl(s, s.design, p, 300, 1e-3, 42);
  const FlRun b = run_fl(s, s.design, p, 300, 1e-3, 42);
  CHECK(a.empirical_round == b.empirical_round);
  CHECK(a.state.loss_history == b.state.loss_history);
  CHECK(a.state.participation_history == b.state.participation_history);
}

TEST_CASE("empty participation holds the global model") {
  SwarmScenario s = default_scenario();
  DesignVector d = s.design;
  d.beta = 1e-9;  // uplink window too short for anyone
  const RegressionProblem p = make_regression_problem(s);
  FlOptions opt;
  opt.stop_at_epsilon = false;
  const FlRun run = run_fl(s, d, p, 10, 1e-3, 1, opt);
  for (double l : run.state.loss_history) CHECK(l == run.state.loss_history.front());
  CHECK(run.state.global_w.norm() == 0.0);
}

TEST_CASE("gradient dominance at random points") {
  const RegressionProblem p = make_regression_problem(5, 40, 5, 0.1, 21, 1.0, 0.5);
  const auto& c = p.loss->constants();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 100; ++k) {
    Vec w(5);
    for (int j = 0; j < 5; ++j) w(j) = 3.0 * normal(rng);
    const double g2 = p.loss->total_gradient(w, p.datasets).squaredNorm();
    const double gap = p.loss->total_loss(w, p.datasets) - c.optimal_loss;
    CHECK(g2 >= 2.0 * c.strong_mu * gap * (1.0 - 1e-12));
  }
}

TEST_CASE("aggregation error bound in sample mean") {
  const SwarmScenario s = default_scenario();
  const RegressionProblem p = make_regression_problem(s);
  const auto& c = p.loss->constants();
  const SuccessEstimate est = estimate_success(s.design, s, 20000, 17);
  const Vec w = Vec::Zero(s.dataset.dim);
  const double g2 = p.loss->total_gradient(w, p.datasets).squaredNorm();
  const std::vector<int> n = p.counts();
  const double total = p.total_count();
  double bound = 0.0;
  for (int i = 0; i < s.n_followers; ++i) bound += n[i] * (c.zeta1 + c.zeta2 * g2) * (1.0 - est.joint[i]) / total;

  ChannelSampler sampler(s, 99);
  ChannelDraw draw;
  std::vector<double> e2;
  const double t_up = s.uplink_budget(s.design.beta), t_down = s.downlink_budget(s.design.beta);
  for (int t = 0; t < 1000; ++t) {
    sampler.next(draw);
    std::vector<bool> part(s.n_followers);
    for (int i = 0; i < s.n_followers; ++i)
      part[i] = uplink_delay(i, draw, s.design, s) <= t_up && downlink_delay(i, draw, s.design, s) <= t_down;
    e2.push_back(aggregation_error(w, p, part).squaredNorm());
  }
  const double se = std::sqrt(oracle::sample_variance(e2) / e2.size());
  CHECK(oracle::mean(e2) <= bound + 2.0 * se);
}

}
