#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "uavfl/experiments.hpp"

using namespace uavfl;

namespace {

SwarmScenario light_scenario() {
  SwarmScenario s = default_scenario();
  s.experiment.mc_samples = 2000;
  s.experiment.max_rounds = 2000;
  return s;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

// Plain full-batch gradient descent with step 1/U written against the raw datasets.
int gd_rounds(const RegressionProblem& p, double eps) {
  const int dim = static_cast<int>(p.w_true.size());
  const double n = p.total_count();
  const double lr = 1.0 / p.loss->constants().lipschitz_u;
  const double f_star = p.loss->constants().optimal_loss;
  std::vector<double> w(dim, 0.0);
  auto loss = [&] {
    double sum = 0.0;
    for (const auto& d : p.datasets)
      for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
        double pred = 0.0;
        for (int j = 0; j < dim; ++j) pred += d.features(r, j) * w[j];
        sum += (pred - d.labels(r)) * (pred - d.labels(r));
      }
    return sum / n;
  };
  for (int t = 0; t < 100000; ++t) {
    if (loss() - f_star <= eps) return t;
    std::vector<double> g(dim, 0.0);
    for (const auto& d : p.datasets)
      for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
        double pred = 0.0;
        for (int j = 0; j < dim; ++j) pred += d.features(r, j) * w[j];
        for (int j = 0; j < dim; ++j) g[j] += 2.0 * (pred - d.labels(r)) * d.features(r, j) / n;
      }
    for (int j = 0; j < dim; ++j) w[j] -= lr * g[j];
  }
  return -1;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("csv layout") {
  const ExperimentResult empty;
  CHECK(to_csv(empty) == csv_header());
  CHECK(csv_header().rfind("schema,experiment,point,variant,epsilon", 0) == 0);

  ExperimentResult r;
  ExperimentRow row;
  row.experiment = "x";
  row.variant = "fixed";
  row.epsilon = 0.1;
  row.predicted_phi = 3;
  row.empirical_mean = std::nan("");
  row.rel_gap = INFINITY;
  row.success = {0.25, 1.0};
  row.design.p = {0.5, 0.125};
  r.rows.push_back(row);
  r.rows.push_back(row);
  const std::string csv = to_csv(r);
  CHECK(count_lines(csv) == 3);
  CHECK(csv.find("0.25;1") != std::string::npos);
  CHECK(csv.find(",nan,") != std::string::npos);
  CHECK(csv.find(",inf,") != std::string::npos);
  CHECK(csv.find("0.100000000") == std::string::npos);
  r.wall_time_s = 123.0;
  CHECK(to_csv(r) == csv);
}

TEST_CASE("csv file output") {
  const auto dir = std::filesystem::temp_directory_path() / "uavfl_exp_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  emit_csv(ExperimentResult{}, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == csv_header());
  try {
    emit_csv(ExperimentResult{}, (dir / "missing" / "out.csv").string());
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("perfect links reproduce plain gradient descent") {
  const SwarmScenario s = light_scenario();
  const RegressionProblem p = make_regression_problem(s);
  const std::vector<double> eps{1e-2, 1e-3, 1e-4};
  FlOptions opt;
  opt.perfect_links = true;
  const EmpiricalRounds emp = empirical_rounds(s, s.design, p, eps, 4, 10, opt);
  for (std::size_t e = 0; e < eps.size(); ++e) {
    CHECK(emp.converged[e] == 4);
    CHECK(emp.stddev[e] == 0.0);
    CHECK(emp.mean[e] == gd_rounds(p, eps[e]));
  }
}

TEST_CASE("validate-theorem rows") {
  const SwarmScenario s = light_scenario();
  const std::vector<double> eps{2.5e-3, 1e-3, 5e-4};
  const ExperimentResult r = experiment_validate_theorem(s, s.design, eps, 8, 3);
  REQUIRE(r.rows.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    const auto& row = r.rows[e];
    CHECK(row.epsilon == eps[e]);
    CHECK(row.converged_runs == 8);
    CHECK(row.rel_gap == doctest::Approx(std::abs(row.predicted_phi - row.empirical_mean) / row.predicted_phi));
    CHECK(row.success.size() == 5);
    if (e > 0) {
      CHECK(row.predicted_phi >= r.rows[e - 1].predicted_phi);
      CHECK(row.empirical_mean >= r.rows[e - 1].empirical_mean);
    }
  }
  CHECK(to_csv(experiment_validate_theorem(s, s.design, eps, 8, 3)) == to_csv(r));
}

TEST_CASE("sweep rows match direct reruns") {
  const SwarmScenario s = light_scenario();
  const ExperimentResult r = experiment_sweep_sigma(s, s.design, {0.0, 0.1}, {1e6}, 6, 21);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].sigma2 == 0.0);
  const SwarmScenario zero = with_sigma2(s, 0.0);
  const RegressionProblem p = make_regression_problem(s);
  const EmpiricalRounds direct = empirical_rounds(zero, s.design, p, {s.experiment.epsilon}, 6, derive_seed(21, 2));
  CHECK(r.rows[0].empirical_mean == direct.mean[0]);
  CHECK(r.rows[0].empirical_std == direct.stddev[0]);
}

TEST_CASE("simulate emits one row per round") {
  const SwarmScenario s = light_scenario();
  const ExperimentResult r = experiment_simulate(s, s.design, 30, 1e-3, 5);
  REQUIRE(r.rows.size() == 31);
  CHECK(r.rows[0].success.empty());
  for (std::size_t t = 1; t < r.rows.size(); ++t) CHECK(r.rows[t].success.size() == 5);
  CHECK(r.rows[30].empirical_mean < r.rows[0].empirical_mean);
  CHECK(to_csv(experiment_simulate(s, s.design, 30, 1e-3, 5)) == to_csv(r));
}

TEST_CASE("parallel_for covers every index and forwards exceptions") {
  std::vector<int> hit(257, 0);
  parallel_for(257, [&](int i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(16, [](int i) {
                    if (i == 7) throw Error(ErrorKind::kNumeric, "boom");
                  }),
                  Error);
}

}
