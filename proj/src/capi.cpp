#include "uavfl/uavfl.h"

#include <algorithm>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "uavfl/experiments.hpp"
#include "uavfl/scenario.hpp"

struct uavfl_scenario {
  uavfl::SwarmScenario value;
};
struct uavfl_design {
  uavfl::DesignVector value;
};
struct uavfl_result {
  uavfl::ExperimentResult value;
  std::optional<uavfl::SolveReport> trace;
};

namespace {

thread_local std::string g_last_error;

uavfl_status status_of(uavfl::ErrorKind kind) {
  switch (kind) {
    case uavfl::ErrorKind::kConfig: return UAVFL_ERR_CONFIG;
    case uavfl::ErrorKind::kInfeasible: return UAVFL_ERR_INFEASIBLE;
    case uavfl::ErrorKind::kArgument: return UAVFL_ERR_ARGUMENT;
    case uavfl::ErrorKind::kIo: return UAVFL_ERR_IO;
    case uavfl::ErrorKind::kNumeric: return UAVFL_ERR_RUNTIME;
  }
  return UAVFL_ERR_RUNTIME;
}

template <class F>
uavfl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return UAVFL_OK;
  } catch (const uavfl::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return UAVFL_ERR_RUNTIME;
}

void require(bool ok, const char* what) {
  if (!ok) throw uavfl::Error(uavfl::ErrorKind::kArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::vector<double> list_or(const double* values, std::size_t n, const std::vector<double>& fallback) {
  if (values == nullptr || n == 0) return fallback;
  return {values, values + n};
}

const uavfl::DesignVector& design_or(const uavfl_design* d, const uavfl::SwarmScenario& s) {
  return d ? d->value : s.design;
}

}  // namespace

extern "C" {

const char* uavfl_last_error(void) { return g_last_error.c_str(); }

const char* uavfl_status_name(uavfl_status status) {
  switch (status) {
    case UAVFL_OK: return "ok";
    case UAVFL_ERR_CONFIG: return "config error";
    case UAVFL_ERR_INFEASIBLE: return "infeasible";
    case UAVFL_ERR_RUNTIME: return "runtime error";
    case UAVFL_ERR_ARGUMENT: return "invalid argument";
    case UAVFL_ERR_IO: return "i/o error";
  }
  return "unknown";
}

void uavfl_string_free(char* text) { delete[] text; }

uavfl_status uavfl_scenario_default(uavfl_scenario** out) {
  return guarded([&] {
    require(out, "out is null");
    *out = new uavfl_scenario{uavfl::default_scenario()};
  });
}

uavfl_status uavfl_scenario_load(const char* path, uavfl_scenario** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new uavfl_scenario{uavfl::load_scenario(path)};
  });
}

uavfl_status uavfl_scenario_from_json(const char* json, uavfl_scenario** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new uavfl_scenario{uavfl::scenario_from_json(json)};
  });
}

uavfl_status uavfl_scenario_to_json(const uavfl_scenario* scenario, char** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    *out = dup_string(uavfl::scenario_to_json(scenario->value));
  });
}

uavfl_status uavfl_scenario_n_followers(const uavfl_scenario* scenario, int* out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    *out = scenario->value.n_followers;
  });
}

void uavfl_scenario_free(uavfl_scenario* scenario) { delete scenario; }

uavfl_status uavfl_design_from_scenario(const uavfl_scenario* scenario, uavfl_design** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    *out = new uavfl_design{scenario->value.design};
  });
}

uavfl_status uavfl_design_get(const uavfl_design* design, double* p, size_t p_capacity, size_t* n_p,
                              double* p_leader, double* beta, double* v) {
  return guarded([&] {
    require(design, "design is null");
    const auto& d = design->value;
    if (n_p) *n_p = d.p.size();
    if (p) {
      require(p_capacity >= d.p.size(), "p buffer too small");
      std::copy(d.p.begin(), d.p.end(), p);
    }
    if (p_leader) *p_leader = d.p_leader;
    if (beta) *beta = d.beta;
    if (v) *v = d.v;
  });
}

uavfl_status uavfl_design_set(uavfl_design* design, const double* p, size_t n_p, double p_leader, double beta,
                              double v) {
  return guarded([&] {
    require(design && (p || n_p == 0), "null argument");
    design->value.p.assign(p, p + n_p);
    design->value.p_leader = p_leader;
    design->value.beta = beta;
    design->value.v = v;
  });
}

void uavfl_design_free(uavfl_design* design) { delete design; }

uavfl_status uavfl_validate_theorem(const uavfl_scenario* scenario, const uavfl_design* design, const double* eps,
                                    size_t n_eps, int mc_runs, uint64_t seed, uavfl_result** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& s = scenario->value;
    auto result = uavfl::experiment_validate_theorem(s, design_or(design, s),
                                                     list_or(eps, n_eps, s.experiment.epsilon_list),
                                                     mc_runs > 0 ? mc_runs : s.experiment.mc_runs, seed);
    *out = new uavfl_result{std::move(result), std::nullopt};
  });
}

uavfl_status uavfl_sweep_sigma(const uavfl_scenario* scenario, const uavfl_design* design, const double* sigma2,
                               size_t n_sigma2, const double* bandwidth, size_t n_bandwidth, int mc_runs,
                               uint64_t seed, uavfl_result** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& s = scenario->value;
    auto result = uavfl::experiment_sweep_sigma(s, design_or(design, s),
                                                list_or(sigma2, n_sigma2, s.experiment.sigma2_list),
                                                list_or(bandwidth, n_bandwidth, s.experiment.bandwidth_list),
                                                mc_runs > 0 ? mc_runs : s.experiment.mc_runs, seed);
    *out = new uavfl_result{std::move(result), std::nullopt};
  });
}

uavfl_status uavfl_compare_designs(const uavfl_scenario* scenario, const double* bandwidth, size_t n_bandwidth,
                                   int n_baseline_draws, int samples_k, uint64_t seed, uavfl_result** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& s = scenario->value;
    auto result = uavfl::experiment_compare_designs(
        s, list_or(bandwidth, n_bandwidth, s.experiment.bandwidth_list),
        n_baseline_draws > 0 ? n_baseline_draws : s.experiment.baseline_draws,
        samples_k > 0 ? samples_k : s.experiment.samples_k, seed);
    *out = new uavfl_result{std::move(result), std::nullopt};
  });
}

uavfl_status uavfl_optimize(const uavfl_scenario* scenario, int samples_k, uint64_t seed, uavfl_result** out,
                            uavfl_design** design_out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& s = scenario->value;
    auto outcome = uavfl::experiment_optimize(s, samples_k > 0 ? samples_k : s.experiment.samples_k, seed);
    if (design_out) *design_out = new uavfl_design{outcome.solve.design};
    *out = new uavfl_result{std::move(outcome.result), std::move(outcome.solve.report)};
  });
}

uavfl_status uavfl_simulate(const uavfl_scenario* scenario, const uavfl_design* design, int max_rounds,
                            double epsilon, uint64_t seed, uavfl_result** out) {
  return guarded([&] {
    require(scenario && out, "null argument");
    const auto& s = scenario->value;
    auto result = uavfl::experiment_simulate(s, design_or(design, s),
                                             max_rounds > 0 ? max_rounds : s.experiment.max_rounds,
                                             epsilon > 0.0 ? epsilon : s.experiment.epsilon, seed);
    *out = new uavfl_result{std::move(result), std::nullopt};
  });
}

uavfl_status uavfl_result_row_count(const uavfl_result* result, size_t* out) {
  return guarded([&] {
    require(result && out, "null argument");
    *out = result->value.rows.size();
  });
}

uavfl_status uavfl_result_wall_time(const uavfl_result* result, double* seconds) {
  return guarded([&] {
    require(result && seconds, "null argument");
    *seconds = result->value.wall_time_s;
  });
}

uavfl_status uavfl_result_to_csv(const uavfl_result* result, char** out) {
  return guarded([&] {
    require(result && out, "null argument");
    *out = dup_string(uavfl::to_csv(result->value));
  });
}

uavfl_status uavfl_result_write_csv(const uavfl_result* result, const char* path) {
  return guarded([&] {
    require(result && path, "null argument");
    uavfl::emit_csv(result->value, path);
  });
}

uavfl_status uavfl_result_trace_csv(const uavfl_result* result, char** out) {
  return guarded([&] {
    require(result && out, "null argument");
    *out = dup_string(uavfl::trace_to_csv(result->trace.value_or(uavfl::SolveReport{})));
  });
}

void uavfl_result_free(uavfl_result* result) { delete result; }

}  // extern "C"
