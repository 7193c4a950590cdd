#include "uavfl/saa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "uavfl/convergence.hpp"
#include "uavfl/energy.hpp"

namespace uavfl {

double sigmoid_gate(double r, double c_bar, double normalizer) {
  return 1.0 / (1.0 + std::exp(-c_bar * r / normalizer));
}

ScenarioSamples make_samples(const SwarmScenario& scenario, int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::kArgument, "make_samples: K must be >= 1");
  ScenarioSamples out;
  ChannelSampler sampler(scenario, seed);
  out.draws.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s) {
    out.draws.push_back(sampler.next());
    std::vector<LinkBudget> up, down;
    for (int i = 0; i < scenario.n_followers; ++i) {
      up.push_back(uplink_budget(i, out.draws.back(), scenario));
      down.push_back(downlink_budget(i, out.draws.back(), scenario));
    }
    out.up.push_back(std::move(up));
    out.down.push_back(std::move(down));
  }
  return out;
}

SaaProblem make_saa_problem(const SwarmScenario& scenario, const RegressionProblem& regression, int samples_k,
                            std::uint64_t seed) {
  SaaProblem p;
  p.scenario = &scenario;
  p.samples = make_samples(scenario, samples_k, seed);
  p.smoothing = SmoothingConfig{scenario.optimizer.c_bar, scenario.round_time, scenario.energy.e_bar};
  p.counts = regression.counts();
  p.mu = regression.loss->constants().strong_mu;
  p.lipschitz_u = regression.loss->constants().lipschitz_u;
  p.epsilon = scenario.experiment.epsilon;
  p.initial_loss_sum = regression.loss->loss_sum(Vec::Zero(regression.w_true.size()), regression.datasets);
  return p;
}

// ---------------------------------------------------------------------------

SaaEvaluator::SaaEvaluator(const SaaProblem& problem, bool smoothed)
    : problem_(&problem), smoothed_(smoothed), n_(problem.n_followers()), k_(problem.k()) {
  t_up_.resize(static_cast<std::size_t>(n_ * k_));
  t_down_.resize(static_cast<std::size_t>(n_ * k_));
  ctrl_.resize(static_cast<std::size_t>(n_));
}

double SaaEvaluator::gate(double r, double normalizer) const {
  if (smoothed_) return sigmoid_gate(r, problem_->smoothing.c_bar, normalizer);
  return r >= 0.0 ? 1.0 : 0.0;
}

void SaaEvaluator::refresh_uplink(int i) {
  const SwarmScenario& s = *problem_->scenario;
  const double p = design_.p[static_cast<std::size_t>(i)];
  for (int k = 0; k < k_; ++k)
    t_up_[static_cast<std::size_t>(i * k_ + k)] =
        transmission_delay(s.radio.pkt_local, s.radio.bw_up, p, problem_->samples.up[k][i]);
}

void SaaEvaluator::refresh_downlink() {
  const SwarmScenario& s = *problem_->scenario;
  for (int i = 0; i < n_; ++i) {
    double ctrl = 0.0;
    const double tau = s.control.tau[static_cast<std::size_t>(i)];
    for (int k = 0; k < k_; ++k) {
      const double t = transmission_delay(s.radio.pkt_global, s.radio.bw_down, design_.p_leader,
                                          problem_->samples.down[k][i]);
      t_down_[static_cast<std::size_t>(i * k_ + k)] = t;
      ctrl += gate(tau - t, problem_->smoothing.delay_scale);
    }
    ctrl_[static_cast<std::size_t>(i)] = ctrl;
  }
}

void SaaEvaluator::refresh_flight() { flight_power_ = flight_power(problem_->scenario->flight, design_.v); }

void SaaEvaluator::set_design(const DesignVector& design) {
  design_ = design;
  for (int i = 0; i < n_; ++i) refresh_uplink(i);
  refresh_downlink();
  refresh_flight();
}

double SaaEvaluator::coordinate(int c) const {
  if (c < n_) return design_.p[static_cast<std::size_t>(c)];
  if (c == n_) return design_.p_leader;
  if (c == n_ + 1) return design_.beta;
  return design_.v;
}

void SaaEvaluator::set_coordinate(int c, double value) {
  if (c < n_) {
    design_.p[static_cast<std::size_t>(c)] = value;
    refresh_uplink(c);
  } else if (c == n_) {
    design_.p_leader = value;
    refresh_downlink();
  } else if (c == n_ + 1) {
    design_.beta = value;
  } else {
    design_.v = value;
    refresh_flight();
  }
}

SaaTerms SaaEvaluator::terms() const {
  const SaaProblem& pb = *problem_;
  const SwarmScenario& s = *pb.scenario;
  const double t_r = pb.smoothing.delay_scale;
  const double t_u = s.uplink_budget(design_.beta);
  const double t_d = s.downlink_budget(design_.beta);
  const double kk = static_cast<double>(k_);

  SaaTerms out;
  out.success.assign(static_cast<std::size_t>(n_), 0.0);
  double weighted = 0.0;
  double total = 0.0;
  for (int i = 0; i < n_; ++i) {
    double succ = 0.0;
    for (int k = 0; k < k_; ++k) {
      const auto idx = static_cast<std::size_t>(i * k_ + k);
      succ += gate(t_u - t_up_[idx], t_r) * gate(t_d - t_down_[idx], t_r);
    }
    out.objective += pb.counts[static_cast<std::size_t>(i)] * succ;
    out.success[static_cast<std::size_t>(i)] = succ / kk;
    weighted += pb.counts[static_cast<std::size_t>(i)] * succ / kk;
    total += pb.counts[static_cast<std::size_t>(i)];
  }

  // phi_k: the convergence round at the sample-set success frequencies, shared by every k
  const double rho = weighted * pb.mu / (total * pb.lipschitz_u);
  double phi;
  if (rho <= 0.0) {
    phi = std::numeric_limits<double>::infinity();
  } else if (rho >= 1.0) {
    phi = 1.0;
  } else if (smoothed_) {
    phi = std::max(0.0, convergence_round_real(rho, pb.epsilon, pb.initial_loss_sum));
  } else {
    phi = convergence_round(rho, pb.epsilon, pb.initial_loss_sum);
  }
  out.phi = phi;

  const double e_bar = s.energy.e_bar;
  const double e_scale = pb.smoothing.energy_scale;
  const double hover = flight_power_ * s.round_time;
  const double leader_round = leader_training_energy(s) + design_.p_leader * t_d + hover;
  const double follower_train = follower_training_energy(s);

  out.residuals.assign(static_cast<std::size_t>(2 * n_ + 1), 0.0);
  out.residuals[0] = kk * gate(e_bar - phi * leader_round, e_scale) - kk * s.energy.xi_leader;
  for (int i = 0; i < n_; ++i) {
    const double p = design_.p[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (int k = 0; k < k_; ++k) {
      const double e = follower_train + p * t_up_[static_cast<std::size_t>(i * k_ + k)] + hover;
      sum += gate(e_bar - phi * e, e_scale);
    }
    out.residuals[static_cast<std::size_t>(1 + i)] = sum - kk * s.energy.xi_follower[static_cast<std::size_t>(i)];
    out.residuals[static_cast<std::size_t>(1 + n_ + i)] = ctrl_[static_cast<std::size_t>(i)] - kk * s.control.xi_control;
  }
  return out;
}

double SaaEvaluator::lagrangian(std::span<const double> lambda) const {
  const SaaTerms t = terms();
  return t.objective + std::inner_product(lambda.begin(), lambda.end(), t.residuals.begin(), 0.0);
}

// ---------------------------------------------------------------------------

double smoothed_objective(const DesignVector& design, const SaaProblem& problem) {
  SaaEvaluator ev(problem, true);
  ev.set_design(design);
  return ev.terms().objective;
}

std::vector<double> smoothed_constraints(const DesignVector& design, const SaaProblem& problem) {
  SaaEvaluator ev(problem, true);
  ev.set_design(design);
  return ev.terms().residuals;
}

SaaTerms indicator_terms(const DesignVector& design, const SaaProblem& problem) {
  SaaEvaluator ev(problem, false);
  ev.set_design(design);
  return ev.terms();
}

bool passes_saa_constraints(const DesignVector& design, const SaaProblem& problem) {
  const SaaTerms t = indicator_terms(design, problem);
  return std::all_of(t.residuals.begin(), t.residuals.end(), [](double r) { return r >= 0.0; });
}

double lagrangian(const DesignVector& design, std::span<const double> lambda, const SaaProblem& problem) {
  SaaEvaluator ev(problem, true);
  ev.set_design(design);
  return ev.lagrangian(lambda);
}

DesignBox design_box(const SwarmScenario& s) {
  return DesignBox{1e-3 * s.p_max, s.p_max, 1e-3, 1.0 - 1e-3, 1e-3 * s.flight.v_max, s.flight.v_max};
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

DesignVector clamp_to_box(DesignVector d, const DesignBox& box) {
  for (double& p : d.p) p = std::clamp(p, box.p_lo, box.p_hi);
  d.p_leader = std::clamp(d.p_leader, box.p_lo, box.p_hi);
  d.beta = std::clamp(d.beta, box.beta_lo, box.beta_hi);
  d.v = std::clamp(d.v, box.v_lo, box.v_hi);
  return d;
}

}  // namespace

InnerResult inner_maximize(std::span<const double> lambda, const SaaProblem& problem, const DesignVector& init,
                           const InnerOptions& opt) {
  for (double l : lambda)
    if (l < 0.0) throw Error(ErrorKind::kArgument, "inner_maximize: multipliers must be nonnegative");
  const DesignBox box = design_box(*problem.scenario);
  const int n = problem.n_followers();
  SaaEvaluator ev(problem, true);
  ev.set_design(clamp_to_box(init, box));
  double best = ev.lagrangian(lambda);

  auto interval = [&](int c) -> std::pair<double, double> {
    if (c <= n) return {box.p_lo, box.p_hi};
    if (c == n + 1) return {box.beta_lo, box.beta_hi};
    return {box.v_lo, box.v_hi};
  };

  InnerResult result;
  for (int cycle = 1; cycle <= opt.max_cycles; ++cycle) {
    const double cycle_start = best;
    for (int c = 0; c < ev.n_coordinates(); ++c) {
      const auto [lo, hi] = interval(c);
      const double x0 = ev.coordinate(c);
      auto f = [&](double x) {
        ev.set_coordinate(c, x);
        return ev.lagrangian(lambda);
      };

      const int g = std::max(opt.grid_points, 3);
      const double h = (hi - lo) / (g - 1);
      int arg = 0;
      double grid_best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < g; ++j) {
        const double val = f(lo + j * h);
        if (val > grid_best) {
          grid_best = val;
          arg = j;
        }
      }
      double a = lo + std::max(arg - 1, 0) * h;
      double b = lo + std::min(arg + 1, g - 1) * h;
      double x1 = b - kInvPhi * (b - a);
      double x2 = a + kInvPhi * (b - a);
      double f1 = f(x1);
      double f2 = f(x2);
      const double tol = opt.x_tol * (hi - lo);
      while (b - a > tol) {
        if (f1 >= f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - kInvPhi * (b - a);
          f1 = f(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + kInvPhi * (b - a);
          f2 = f(x2);
        }
      }
      double cand_x = f1 >= f2 ? x1 : x2;
      double cand_f = std::max(f1, f2);
      if (grid_best > cand_f) {
        cand_x = lo + arg * h;
        cand_f = grid_best;
      }
      if (cand_f > best) {
        ev.set_coordinate(c, cand_x);
        best = cand_f;
      } else {
        ev.set_coordinate(c, x0);
      }
    }
    result.cycles = cycle;
    if (best - cycle_start <= opt.rel_tol * std::max(std::abs(best), 1.0)) break;
  }
  result.design = ev.design();
  result.dual_value = best;
  return result;
}

std::vector<double> dual_subgradient(const DesignVector& maximizer, const SaaProblem& problem) {
  return smoothed_constraints(maximizer, problem);
}

SolveOptions solve_options(const SwarmScenario& s) {
  SolveOptions o;
  o.max_iters = s.optimizer.max_iters;
  o.step_scale = s.optimizer.step_scale;
  o.use_ellipsoid = s.optimizer.use_ellipsoid;
  o.inner.max_cycles = s.optimizer.inner_max_cycles;
  o.inner.rel_tol = s.optimizer.inner_rel_tol;
  o.mc_samples = s.experiment.mc_samples;
  return o;
}

namespace {

struct Tracker {
  const SaaProblem* problem;
  bool found = false;
  double best_objective = -std::numeric_limits<double>::infinity();
  DesignVector best;

  DualIterate record(int iter, const InnerResult& inner, const std::vector<double>& lambda,
                     const std::vector<double>& residuals, double best_dual) {
    DualIterate it;
    it.iteration = iter;
    it.dual_value = inner.dual_value;
    it.best_dual = best_dual;
    it.lambda = lambda;
    it.residuals = residuals;
    const SaaTerms ind = indicator_terms(inner.design, *problem);
    it.indicator_objective = ind.objective;
    it.min_indicator_margin = *std::min_element(ind.residuals.begin(), ind.residuals.end());
    it.feasible = it.min_indicator_margin >= 0.0;
    if (it.feasible) {
      const double obj = smoothed_objective(inner.design, *problem);
      if (obj > best_objective) {
        best_objective = obj;
        best = inner.design;
        found = true;
      }
    }
    return it;
  }
};

}  // namespace

SolveResult solve(const SaaProblem& problem, std::uint64_t seed, const SolveOptions& options) {
  const SwarmScenario& s = *problem.scenario;
  const int m = problem.n_constraints();
  const double n_total = std::accumulate(problem.counts.begin(), problem.counts.end(), 0.0);
  const double kk = static_cast<double>(problem.k());

  SolveResult result;
  SolveReport& report = result.report;
  report.method = options.use_ellipsoid ? "ellipsoid" : "subgradient";
  Tracker tracker;
  tracker.problem = &problem;

  DesignVector x = s.design;
  x.p.assign(static_cast<std::size_t>(s.n_followers), s.p_max);
  x.p_leader = s.p_max;
  x.beta = 0.5;
  x.v = s.flight.v_max;

  std::vector<double> lambda(static_cast<std::size_t>(m), 0.0);
  double best_dual = std::numeric_limits<double>::infinity();

  if (!options.use_ellipsoid) {
    const double a = options.step_scale * n_total / kk;
    for (int t = 1; t <= options.max_iters; ++t) {
      const InnerResult inner = inner_maximize(lambda, problem, x, options.inner);
      x = inner.design;
      const std::vector<double> g = dual_subgradient(x, problem);
      best_dual = std::min(best_dual, inner.dual_value);
      report.trace.push_back(tracker.record(t, inner, lambda, g, best_dual));
      const double step = a / std::sqrt(static_cast<double>(t));
      bool stationary = true;
      for (int j = 0; j < m; ++j) {
        const double next = std::max(0.0, lambda[j] - step * g[j]);
        stationary = stationary && next == lambda[j];
        lambda[j] = next;
      }
      // every multiplier pinned at zero with slack constraints: the maximizer no longer moves
      if (stationary && tracker.found) break;
    }
  } else {
    // Central-cut ellipsoid over lambda >= 0, starting from the ball of radius R around 0.
    const double radius = 2.0 * n_total;
    Mat shape = Mat::Identity(m, m) * radius * radius;
    Vec center = Vec::Zero(m);
    const double md = m;
    for (int t = 1; t <= options.max_iters; ++t) {
      Vec cut(m);
      Eigen::Index neg;
      if (center.minCoeff(&neg) < 0.0) {
        cut.setZero();
        cut(neg) = -1.0;
      } else {
        lambda.assign(center.data(), center.data() + m);
        const InnerResult inner = inner_maximize(lambda, problem, x, options.inner);
        x = inner.design;
        const std::vector<double> g = dual_subgradient(x, problem);
        best_dual = std::min(best_dual, inner.dual_value);
        report.trace.push_back(tracker.record(t, inner, lambda, g, best_dual));
        for (int j = 0; j < m; ++j) cut(j) = g[j];
        if (cut.norm() == 0.0) break;
      }
      const double scale = std::sqrt(cut.dot(shape * cut));
      if (!(scale > 0.0)) break;
      const Vec pg = shape * cut / scale;
      center -= pg / (md + 1.0);
      shape = md * md / (md * md - 1.0) * (shape - 2.0 / (md + 1.0) * pg * pg.transpose());
    }
  }

  if (!tracker.found) throw Error(ErrorKind::kInfeasible, "no feasible design found");
  result.design = tracker.best;
  report.final_margins = indicator_terms(result.design, problem).residuals;

  const SuccessEstimate est = estimate_success(result.design, s, options.mc_samples, derive_seed(seed, 0x5eed));
  ConvergenceInputs in{est.joint, problem.counts, problem.mu, problem.lipschitz_u, problem.epsilon,
                       problem.initial_loss_sum};
  report.success = est.joint;
  report.rho = convergence_speed(in);
  result.predicted_round = report.rho > 0.0 ? convergence_round(in) : std::numeric_limits<int>::max();
  return result;
}

SolveResult solve(const SwarmScenario& scenario, const RegressionProblem& regression, int samples_k,
                  std::uint64_t seed, const SolveOptions& options) {
  const SaaProblem problem = make_saa_problem(scenario, regression, samples_k, seed);
  return solve(problem, seed, options);
}

DesignVector baseline_design(BaselineKind kind, const DesignVector& joint, const SwarmScenario& s,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // 1 - U[0,1) lies in (0,1]
  auto open_low = [&] { return 1.0 - u(rng); };
  DesignVector d = joint;
  if (kind == BaselineKind::kPowerOnly) {
    double beta = 0.0;
    while (!(beta > 0.0 && beta < 1.0)) beta = u(rng);
    d.beta = beta;
  } else {
    for (double& p : d.p) p = s.p_max * open_low();
    d.p_leader = s.p_max * open_low();
  }
  return d;
}

Prediction predict_round(const DesignVector& design, const SwarmScenario& scenario,
                         const RegressionProblem& regression, double epsilon, int mc_samples, std::uint64_t seed) {
  const SuccessEstimate est = estimate_success(design, scenario, mc_samples, seed);
  ConvergenceInputs in;
  in.success_prob = est.joint;
  in.counts = regression.counts();
  in.mu = regression.loss->constants().strong_mu;
  in.lipschitz_u = regression.loss->constants().lipschitz_u;
  in.epsilon = epsilon;
  in.initial_loss_sum = regression.loss->loss_sum(Vec::Zero(regression.w_true.size()), regression.datasets);
  Prediction out;
  out.success = est.joint;
  out.rho = convergence_speed(in);
  out.round = out.rho > 0.0 ? convergence_round(in) : std::numeric_limits<int>::max();
  return out;
}

}  // namespace uavfl
