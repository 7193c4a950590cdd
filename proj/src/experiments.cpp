#include "uavfl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "uavfl/channel.hpp"
#include "uavfl/convergence.hpp"
#include "uavfl/energy.hpp"

namespace uavfl {

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, std::max(n, 1));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

SwarmScenario with_sigma2(SwarmScenario s, double sigma2) {
  s.sigma2_leader = sigma2;
  std::fill(s.sigma2_follower.begin(), s.sigma2_follower.end(), sigma2);
  return s;
}

SwarmScenario with_bandwidth(SwarmScenario s, double bandwidth) {
  s.radio.bw_up = bandwidth;
  s.radio.bw_down = bandwidth;
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct PointPrediction {
  Prediction prediction;
  double energy_leader = 0.0;
  double energy_follower_max = 0.0;
};

// Energy totals use min(phi, round_cap); with no cap they are infinite when rho = 0.
PointPrediction predict_point(const DesignVector& design, const SwarmScenario& s, const RegressionProblem& problem,
                              double epsilon, std::uint64_t seed,
                              double round_cap = std::numeric_limits<double>::infinity()) {
  const SuccessEstimate est = estimate_success(design, s, s.experiment.mc_samples, seed);
  ConvergenceInputs in;
  in.success_prob = est.joint;
  in.counts = problem.counts();
  in.mu = problem.loss->constants().strong_mu;
  in.lipschitz_u = problem.loss->constants().lipschitz_u;
  in.epsilon = epsilon;
  in.initial_loss_sum = problem.loss->loss_sum(Vec::Zero(problem.w_true.size()), problem.datasets);

  PointPrediction out;
  out.prediction.success = est.joint;
  out.prediction.rho = convergence_speed(in);
  out.prediction.round = out.prediction.rho > 0.0 ? convergence_round(in) : std::numeric_limits<int>::max();
  const double phi = out.prediction.rho > 0.0 ? std::min<double>(out.prediction.round, round_cap) : round_cap;
  out.energy_leader = phi * round_energy(Role::kLeader, 0, design, 0.0, s);
  for (int i = 0; i < s.n_followers; ++i)
    out.energy_follower_max = std::max(
        out.energy_follower_max,
        phi * round_energy(Role::kFollower, i, design, est.mean_uplink_delay[static_cast<std::size_t>(i)], s));
  return out;
}

void fill_prediction(ExperimentRow& row, const PointPrediction& p) {
  row.predicted_phi = p.prediction.round;
  row.rho = p.prediction.rho;
  row.success = p.prediction.success;
  row.energy_leader = p.energy_leader;
  row.energy_follower_max = p.energy_follower_max;
}

}  // namespace

EmpiricalRounds empirical_rounds(const SwarmScenario& scenario, const DesignVector& design,
                                 const RegressionProblem& problem, const std::vector<double>& eps_list, int mc_runs,
                                 std::uint64_t seed, const FlOptions& options) {
  const auto n_eps = eps_list.size();
  const double eps_min = *std::min_element(eps_list.begin(), eps_list.end());
  const double f_star = problem.loss->constants().optimal_loss;
  std::vector<std::vector<int>> crossings(static_cast<std::size_t>(mc_runs), std::vector<int>(n_eps, -1));

  parallel_for(mc_runs, [&](int r) {
    FlOptions opt = options;
    opt.stop_at_epsilon = true;
    const FlRun run = run_fl(scenario, design, problem, scenario.experiment.max_rounds, eps_min,
                             derive_seed(seed, static_cast<std::uint64_t>(r)), opt);
    const auto& hist = run.state.loss_history;
    for (std::size_t e = 0; e < n_eps; ++e) {
      for (std::size_t t = 0; t < hist.size(); ++t) {
        if (hist[t] - f_star <= eps_list[e]) {
          crossings[static_cast<std::size_t>(r)][e] = static_cast<int>(t);
          break;
        }
      }
    }
  });

  EmpiricalRounds out;
  for (std::size_t e = 0; e < n_eps; ++e) {
    double sum = 0.0, sum2 = 0.0;
    int count = 0;
    for (const auto& c : crossings) {
      if (c[e] < 0) continue;
      sum += c[e];
      sum2 += static_cast<double>(c[e]) * c[e];
      ++count;
    }
    const double mean = count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
    const double var = count > 1 ? std::max(0.0, (sum2 - count * mean * mean) / (count - 1)) : 0.0;
    out.mean.push_back(mean);
    out.stddev.push_back(std::sqrt(var));
    out.converged.push_back(count);
  }
  return out;
}

ExperimentResult experiment_validate_theorem(const SwarmScenario& scenario, const DesignVector& design,
                                             const std::vector<double>& eps_list, int mc_runs, std::uint64_t seed) {
  const auto start = Clock::now();
  validate_design(design, scenario);
  const RegressionProblem problem = make_regression_problem(scenario);
  const EmpiricalRounds emp = empirical_rounds(scenario, design, problem, eps_list, mc_runs, derive_seed(seed, 2));

  ExperimentResult result;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    ExperimentRow row;
    row.experiment = "validate-theorem";
    row.point = static_cast<int>(e);
    row.variant = "fixed";
    row.epsilon = eps_list[e];
    row.sigma2 = scenario.sigma2_leader;
    row.bandwidth = scenario.radio.bw_up;
    row.design = design;
    fill_prediction(row, predict_point(design, scenario, problem, eps_list[e], derive_seed(seed, 1)));
    row.empirical_mean = emp.mean[e];
    row.empirical_std = emp.stddev[e];
    row.converged_runs = emp.converged[e];
    row.rel_gap = std::abs(row.predicted_phi - row.empirical_mean) / row.predicted_phi;
    result.rows.push_back(std::move(row));
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

ExperimentResult experiment_sweep_sigma(const SwarmScenario& scenario, const DesignVector& design,
                                        const std::vector<double>& sigma2_list, const std::vector<double>& bw_list,
                                        int mc_runs, std::uint64_t seed) {
  const auto start = Clock::now();
  validate_design(design, scenario);
  const RegressionProblem problem = make_regression_problem(scenario);
  const double eps = scenario.experiment.epsilon;

  ExperimentResult result;
  int point = 0;
  for (double bw : bw_list) {
    for (double s2 : sigma2_list) {
      const SwarmScenario s = with_sigma2(with_bandwidth(scenario, bw), s2);
      ExperimentRow row;
      row.experiment = "sweep-sigma";
      row.point = point++;
      row.variant = "fixed";
      row.epsilon = eps;
      row.sigma2 = s2;
      row.bandwidth = bw;
      row.design = design;
      fill_prediction(row, predict_point(design, s, problem, eps, derive_seed(seed, 1)));
      const EmpiricalRounds emp = empirical_rounds(s, design, problem, {eps}, mc_runs, derive_seed(seed, 2));
      row.empirical_mean = emp.mean[0];
      row.empirical_std = emp.stddev[0];
      row.converged_runs = emp.converged[0];
      row.rel_gap = std::abs(row.predicted_phi - row.empirical_mean) / row.predicted_phi;
      result.rows.push_back(std::move(row));
    }
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

ExperimentResult experiment_compare_designs(const SwarmScenario& scenario, const std::vector<double>& bw_list,
                                            int n_baseline_draws, int samples_k, std::uint64_t seed) {
  const auto start = Clock::now();
  const RegressionProblem problem = make_regression_problem(scenario);
  const double eps = scenario.experiment.epsilon;
  // rounds are censored at max_rounds so a baseline draw with zero success
  // probability does not turn the mean infinite
  const double cap = scenario.experiment.max_rounds;
  auto censor = [cap](int phi) { return std::min(static_cast<double>(phi), cap); };

  ExperimentResult result;
  int point = 0;
  for (std::size_t b = 0; b < bw_list.size(); ++b) {
    const SwarmScenario s = with_bandwidth(scenario, bw_list[b]);
    const SolveResult joint = solve(s, problem, samples_k, derive_seed(seed, 3), solve_options(s));
    const PointPrediction joint_pred = predict_point(joint.design, s, problem, eps, derive_seed(seed, 1), cap);

    ExperimentRow jrow;
    jrow.experiment = "compare-designs";
    jrow.point = point;
    jrow.variant = "joint";
    jrow.epsilon = eps;
    jrow.sigma2 = s.sigma2_leader;
    jrow.bandwidth = bw_list[b];
    jrow.design = joint.design;
    fill_prediction(jrow, joint_pred);
    jrow.predicted_phi = censor(joint_pred.prediction.round);
    result.rows.push_back(jrow);

    for (BaselineKind kind : {BaselineKind::kPowerOnly, BaselineKind::kSchedulingOnly}) {
      std::vector<double> phis(static_cast<std::size_t>(n_baseline_draws));
      std::vector<PointPrediction> preds(static_cast<std::size_t>(n_baseline_draws));
      std::vector<DesignVector> designs(static_cast<std::size_t>(n_baseline_draws));
      const std::uint64_t kind_tag = kind == BaselineKind::kPowerOnly ? 4 : 5;
      parallel_for(n_baseline_draws, [&](int r) {
        const auto idx = static_cast<std::size_t>(r);
        designs[idx] = baseline_design(kind, joint.design, s, derive_seed(seed, kind_tag, static_cast<std::uint64_t>(r)));
        preds[idx] = predict_point(designs[idx], s, problem, eps, derive_seed(seed, 1), cap);
        phis[idx] = censor(preds[idx].prediction.round);
      });
      ExperimentRow row = jrow;
      row.variant = kind == BaselineKind::kPowerOnly ? "power-only" : "scheduling-only";
      double mean = 0.0, var = 0.0, rho = 0.0, e_l = 0.0, e_f = 0.0;
      std::vector<double> succ(static_cast<std::size_t>(s.n_followers), 0.0);
      for (std::size_t r = 0; r < phis.size(); ++r) {
        mean += phis[r];
        rho += preds[r].prediction.rho;
        e_l += preds[r].energy_leader;
        e_f += preds[r].energy_follower_max;
        for (std::size_t i = 0; i < succ.size(); ++i) succ[i] += preds[r].prediction.success[i];
      }
      const double nd = n_baseline_draws;
      mean /= nd;
      for (double phi : phis) var += (phi - mean) * (phi - mean);
      for (double& v : succ) v /= nd;
      row.predicted_phi = mean;
      row.empirical_std = n_baseline_draws > 1 ? std::sqrt(var / (nd - 1)) : 0.0;
      row.rho = rho / nd;
      row.success = succ;
      row.energy_leader = e_l / nd;
      row.energy_follower_max = e_f / nd;
      row.design = designs.front();
      row.reduction_pct = mean > 0.0 ? 100.0 * (mean - jrow.predicted_phi) / mean : 0.0;
      result.rows.push_back(std::move(row));
    }
    ++point;
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

OptimizeOutcome experiment_optimize(const SwarmScenario& scenario, int samples_k, std::uint64_t seed) {
  const auto start = Clock::now();
  const RegressionProblem problem = make_regression_problem(scenario);
  OptimizeOutcome out;
  out.solve = solve(scenario, problem, samples_k, derive_seed(seed, 3), solve_options(scenario));
  ExperimentRow row;
  row.experiment = "optimize";
  row.variant = "joint";
  row.epsilon = scenario.experiment.epsilon;
  row.sigma2 = scenario.sigma2_leader;
  row.bandwidth = scenario.radio.bw_up;
  row.design = out.solve.design;
  fill_prediction(row, predict_point(out.solve.design, scenario, problem, row.epsilon, derive_seed(seed, 1)));
  out.result.rows.push_back(std::move(row));
  out.result.wall_time_s = seconds_since(start);
  return out;
}

ExperimentResult experiment_simulate(const SwarmScenario& scenario, const DesignVector& design, int max_rounds,
                                     double epsilon, std::uint64_t seed) {
  const auto start = Clock::now();
  const RegressionProblem problem = make_regression_problem(scenario);
  FlOptions opt;
  opt.stop_at_epsilon = false;
  const FlRun run = run_fl(scenario, design, problem, max_rounds, epsilon, derive_seed(seed, 2), opt);
  const double f_star = problem.loss->constants().optimal_loss;

  ExperimentResult result;
  for (std::size_t t = 0; t < run.state.loss_history.size(); ++t) {
    ExperimentRow row;
    row.experiment = "simulate";
    row.point = static_cast<int>(t);
    row.variant = "round";
    row.epsilon = epsilon;
    row.sigma2 = scenario.sigma2_leader;
    row.bandwidth = scenario.radio.bw_up;
    row.design = design;
    row.empirical_mean = run.state.loss_history[t] - f_star;
    row.converged_runs = run.empirical_round && static_cast<int>(t) >= *run.empirical_round ? 1 : 0;
    if (t > 0) {
      for (bool c : run.state.participation_history[t - 1]) row.success.push_back(c ? 1.0 : 0.0);
    }
    result.rows.push_back(std::move(row));
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += fmt(values[i]);
  }
  return out;
}

}  // namespace

std::string csv_header() {
  return "schema,experiment,point,variant,epsilon,sigma2,bandwidth_hz,predicted_phi,empirical_phi_mean,"
         "empirical_phi_std,converged_runs,rel_gap,rho,success,p_w,p_leader_w,beta,v_mps,energy_leader_j,"
         "energy_follower_max_j,reduction_pct\n";
}

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << csv_header();
  for (const auto& r : result.rows) {
    os << kResultSchemaVersion << ',' << r.experiment << ',' << r.point << ',' << r.variant << ',' << fmt(r.epsilon)
       << ',' << fmt(r.sigma2) << ',' << fmt(r.bandwidth) << ',' << fmt(r.predicted_phi) << ','
       << fmt(r.empirical_mean) << ',' << fmt(r.empirical_std) << ',' << r.converged_runs << ',' << fmt(r.rel_gap)
       << ',' << fmt(r.rho) << ',' << join(r.success) << ',' << join(r.design.p) << ',' << fmt(r.design.p_leader)
       << ',' << fmt(r.design.beta) << ',' << fmt(r.design.v) << ',' << fmt(r.energy_leader) << ','
       << fmt(r.energy_follower_max) << ',' << fmt(r.reduction_pct) << '\n';
  }
  return os.str();
}

std::string trace_to_csv(const SolveReport& report) {
  std::ostringstream os;
  os << "iteration,dual_value,best_dual,indicator_objective,min_indicator_margin,feasible,lambda,residuals\n";
  for (const auto& it : report.trace)
    os << it.iteration << ',' << fmt(it.dual_value) << ',' << fmt(it.best_dual) << ','
       << fmt(it.indicator_objective) << ',' << fmt(it.min_indicator_margin) << ',' << (it.feasible ? 1 : 0) << ','
       << join(it.lambda) << ',' << join(it.residuals) << '\n';
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open output file: " + path);
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path);
}

void emit_csv(const ExperimentResult& result, const std::string& path) { write_text_file(path, to_csv(result)); }

}  // namespace uavfl
