#include "uavfl/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace uavfl {

using nlohmann::json;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_per_hz_to_watt_per_hz(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

AntennaPattern SwarmScenario::follower_antenna(int i) const {
  const auto idx = static_cast<std::size_t>(i);
  return AntennaPattern{links[idx].theta_follower, sigma2_follower[idx], g_min, sections};
}

AntennaPattern SwarmScenario::leader_antenna(int i) const {
  return AntennaPattern{links[static_cast<std::size_t>(i)].theta_leader, sigma2_leader, g_min,
                        sections};
}

namespace {

// Uplink interferers sit in the leader's main lobe and point their side lobe
// at it; downlink interferers are side-lobe on both ends and farther out.
std::vector<Interferer> default_interferers_up(double p_max, double g_min) {
  std::vector<Interferer> out;
  for (double d : {150.0, 200.0, 250.0}) out.push_back(Interferer{d, p_max, g_min, 0.5});
  return out;
}

std::vector<Interferer> default_interferers_down(double p_max, double g_min) {
  std::vector<Interferer> out;
  for (double d : {300.0, 400.0, 500.0}) out.push_back(Interferer{d, p_max, g_min * g_min, 0.5});
  return out;
}

// Per-follower vectors left empty in a config are filled from the scalar default.
void fill_per_follower(SwarmScenario& s) {
  const auto n = static_cast<std::size_t>(std::max(s.n_followers, 0));
  if (s.links.empty())
    for (std::size_t i = 0; i < n; ++i) s.links.push_back(LinkGeometry{50.0 + 25.0 * double(i), 0.0, 0.0});
  if (s.sigma2_follower.empty()) s.sigma2_follower.assign(n, s.sigma2_leader);
  if (s.control.tau.empty()) s.control.tau.assign(n, 0.05);
  if (s.energy.xi_follower.empty()) s.energy.xi_follower.assign(n, 0.9);
  if (s.design.p.empty()) {
    s.design.p.assign(n, s.p_max);
    if (s.design.p_leader == 0.0) s.design.p_leader = s.p_max;
    if (s.design.v == 0.0) s.design.v = s.flight.v_max;
  }
}

class Checker {
 public:
  void require(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) problems_.push_back(field + ": " + rule);
  }
  void throw_if_any() const {
    if (problems_.empty()) return;
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& p : problems_) os << "\n  " << p;
    throw Error(ErrorKind::kConfig, os.str());
  }

 private:
  std::vector<std::string> problems_;
};

template <class T>
void get(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void read_interferers(const json& j, const char* key, std::vector<Interferer>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  out.clear();
  for (const auto& e : *it) {
    Interferer in;
    get(e, "distance_m", in.distance);
    get(e, "power_w", in.power);
    get(e, "gain_product", in.gain_product);
    get(e, "active_prob", in.active_prob);
    out.push_back(in);
  }
}

json write_interferers(const std::vector<Interferer>& field) {
  json arr = json::array();
  for (const auto& in : field)
    arr.push_back({{"distance_m", in.distance},
                   {"power_w", in.power},
                   {"gain_product", in.gain_product},
                   {"active_prob", in.active_prob}});
  return arr;
}

}  // namespace

SwarmScenario default_scenario() {
  SwarmScenario s;
  s.g_min = db_to_linear(s.g_min_db);
  s.interferers_up = default_interferers_up(s.p_max, s.g_min);
  s.interferers_down = default_interferers_down(s.p_max, s.g_min);
  s.experiment.epsilon_list = {5e-4, 1e-3, 1.5e-3, 2e-3, 2.5e-3};
  s.experiment.sigma2_list = {0.01, 0.05, 0.1, 0.2};
  s.experiment.bandwidth_list = {1e6, 2e6, 5e6};
  fill_per_follower(s);
  finalize_scenario(s);
  return s;
}

void finalize_scenario(SwarmScenario& s) {
  Checker c;
  const auto n = static_cast<std::size_t>(std::max(s.n_followers, 0));
  c.require(s.n_followers >= 1, "n_followers", "must be >= 1");
  c.require(s.links.size() == n, "links", "need one entry per follower");
  for (std::size_t i = 0; i < s.links.size(); ++i)
    c.require(s.links[i].distance > 0.0, "links[" + std::to_string(i) + "].distance_m", "must be > 0");
  c.require(s.pathloss_exp >= 2.0, "pathloss_exp", "must be >= 2");
  c.require(s.sigma2_leader >= 0.0, "sigma2_leader", "must be >= 0");
  c.require(s.sigma2_follower.size() == n, "sigma2_follower", "need one entry per follower");
  for (double v : s.sigma2_follower) c.require(v >= 0.0, "sigma2_follower", "entries must be >= 0");
  s.g_min = db_to_linear(s.g_min_db);
  c.require(s.g_min > 0.0 && s.g_min <= 1.0, "g_min_db", "must be <= 0 dB");
  c.require(s.sections >= 1, "sections", "must be >= 1");
  for (const auto* field : {&s.interferers_up, &s.interferers_down}) {
    const char* name = field == &s.interferers_up ? "interferers_up" : "interferers_down";
    for (const auto& in : *field) {
      c.require(in.distance > 0.0, name, "distance_m must be > 0");
      c.require(in.power >= 0.0, name, "power_w must be >= 0");
      c.require(in.gain_product >= 0.0, name, "gain_product must be >= 0");
      c.require(in.active_prob >= 0.0 && in.active_prob <= 1.0, name, "active_prob must lie in [0,1]");
    }
  }
  c.require(s.radio.bw_up > 0.0, "bw_up", "must be > 0");
  c.require(s.radio.bw_down > 0.0, "bw_down", "must be > 0");
  s.radio.noise_psd = dbm_per_hz_to_watt_per_hz(s.radio.noise_psd_dbm_hz);
  c.require(s.radio.noise_psd > 0.0, "noise_psd_dbm_hz", "must map to a positive density");
  c.require(s.radio.pkt_local > 0.0, "pkt_local_bits", "must be > 0");
  c.require(s.radio.pkt_global > 0.0, "pkt_global_bits", "must be > 0");
  c.require(s.radio.rician_k >= 0.0, "rician_k", "must be >= 0");
  c.require(s.p_max > 0.0, "p_max", "must be > 0");
  c.require(s.round_time > 0.0, "round_time_s", "must be > 0");
  c.require(s.compute.kappa > 0.0, "kappa", "must be > 0");
  c.require(s.compute.cycles_per_bit > 0.0, "cycles_per_bit", "must be > 0");
  c.require(s.compute.cpu_freq > 0.0, "cpu_freq_hz", "must be > 0");
  c.require(s.flight.rotors >= 1, "rotors", "must be >= 1");
  c.require(s.flight.rotor_diameter > 0.0, "rotor_diameter_m", "must be > 0");
  c.require(s.flight.air_density > 0.0, "air_density", "must be > 0");
  c.require(s.flight.efficiency > 0.0 && s.flight.efficiency <= 1.0, "efficiency", "must lie in (0,1]");
  c.require(s.flight.mass > 0.0, "mass_kg", "must be > 0");
  c.require(s.flight.gravity > 0.0, "gravity", "must be > 0");
  c.require(s.flight.v_max > 0.0, "v_max", "must be > 0");
  c.require(s.energy.e_bar > 0.0, "energy_budget_j", "must be > 0");
  c.require(s.energy.xi_leader > 0.0 && s.energy.xi_leader < 1.0, "xi_leader", "must lie in (0,1)");
  c.require(s.energy.xi_follower.size() == n, "xi_follower", "need one entry per follower");
  for (double v : s.energy.xi_follower)
    c.require(v > 0.0 && v < 1.0, "xi_follower", "entries must lie in (0,1)");
  c.require(s.control.tau.size() == n, "tau_s", "need one entry per follower");
  for (double v : s.control.tau) c.require(v > 0.0, "tau_s", "entries must be > 0");
  c.require(s.control.xi_control > 0.0 && s.control.xi_control < 1.0, "xi_control", "must lie in (0,1)");
  c.require(s.dataset.samples_per_follower >= s.dataset.dim, "dataset.samples_per_follower",
            "must be >= dataset.dim");
  c.require(s.dataset.dim >= 1, "dataset.dim", "must be >= 1");
  c.require(s.dataset.noise >= 0.0, "dataset.noise", "must be >= 0");
  c.require(s.dataset.feature_scale > 0.0, "dataset.feature_scale", "must be > 0");
  c.require(s.dataset.heterogeneity >= 0.0, "dataset.heterogeneity", "must be >= 0");
  c.require(s.dataset.sample_bits > 0.0, "dataset.sample_bits", "must be > 0");
  c.require(s.optimizer.c_bar > 0.0, "optimizer.c_bar", "must be > 0");
  c.require(s.optimizer.max_iters >= 1, "optimizer.max_iters", "must be >= 1");
  c.require(s.optimizer.step_scale > 0.0, "optimizer.step_scale", "must be > 0");
  c.require(s.experiment.epsilon > 0.0, "experiment.epsilon", "must be > 0");
  for (double e : s.experiment.epsilon_list) c.require(e > 0.0, "experiment.epsilon_list", "entries must be > 0");
  for (double b : s.experiment.bandwidth_list)
    c.require(b > 0.0, "experiment.bandwidth_list", "entries must be > 0");
  for (double v : s.experiment.sigma2_list) c.require(v >= 0.0, "experiment.sigma2_list", "entries must be >= 0");
  c.require(s.experiment.samples_k >= 1, "experiment.samples_k", "must be >= 1");
  c.require(s.experiment.mc_samples >= 1, "experiment.mc_samples", "must be >= 1");
  c.require(s.experiment.mc_runs >= 1, "experiment.mc_runs", "must be >= 1");
  c.require(s.experiment.max_rounds >= 1, "experiment.max_rounds", "must be >= 1");
  c.require(s.experiment.baseline_draws >= 1, "experiment.baseline_draws", "must be >= 1");
  c.require(s.design.p.size() == n, "design.p", "need one entry per follower");
  for (double p : s.design.p) c.require(p > 0.0 && p <= s.p_max, "design.p", "entries must lie in (0, p_max]");
  c.require(s.design.p_leader > 0.0 && s.design.p_leader <= s.p_max, "design.p_leader", "must lie in (0, p_max]");
  c.require(s.design.beta > 0.0 && s.design.beta < 1.0, "design.beta", "must lie in (0,1)");
  c.require(s.design.v > 0.0 && s.design.v <= s.flight.v_max, "design.v", "must lie in (0, v_max]");
  c.throw_if_any();
}

void validate_design(const DesignVector& d, const SwarmScenario& s) {
  bool ok = d.p.size() == static_cast<std::size_t>(s.n_followers);
  for (double p : d.p) ok = ok && p > 0.0 && p <= s.p_max;
  ok = ok && d.p_leader > 0.0 && d.p_leader <= s.p_max;
  ok = ok && d.beta > 0.0 && d.beta < 1.0;
  ok = ok && d.v > 0.0 && d.v <= s.flight.v_max;
  if (!ok) throw Error(ErrorKind::kArgument, "design outside the box 0 < p <= p_max, 0 < beta < 1, 0 < v <= v_max");
}

SwarmScenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = text.empty() ? json::object() : json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "parse error: top level must be an object");

  SwarmScenario s;
  try {
    get(j, "n_followers", s.n_followers);
    get(j, "p_max_w", s.p_max);
    get(j, "round_time_s", s.round_time);
    get(j, "pathloss_exp", s.pathloss_exp);
    if (auto it = j.find("links"); it != j.end()) {
      for (const auto& e : *it) {
        LinkGeometry g;
        get(e, "distance_m", g.distance);
        get(e, "theta_follower", g.theta_follower);
        get(e, "theta_leader", g.theta_leader);
        s.links.push_back(g);
      }
    }
    if (auto it = j.find("distances_m"); it != j.end()) {
      s.links.clear();
      for (double d : *it) s.links.push_back(LinkGeometry{d, 0.0, 0.0});
    }

    json a = j.value("antenna", json::object());
    if (j.contains("sigma2")) {
      s.sigma2_leader = j["sigma2"].get<double>();
    }
    get(a, "sigma2_leader", s.sigma2_leader);
    get(a, "sigma2_follower", s.sigma2_follower);
    get(a, "g_min_db", s.g_min_db);
    get(a, "sections", s.sections);
    std::string model = a.value("gain_model", std::string("exact"));
    if (model == "exact") s.gain_model = GainModel::kExact;
    else if (model == "sectionalized") s.gain_model = GainModel::kSectionalized;
    else throw Error(ErrorKind::kConfig, "invalid scenario:\n  antenna.gain_model: must be exact or sectionalized");

    json r = j.value("radio", json::object());
    get(r, "bw_up_hz", s.radio.bw_up);
    get(r, "bw_down_hz", s.radio.bw_down);
    get(r, "noise_psd_dbm_hz", s.radio.noise_psd_dbm_hz);
    get(r, "pkt_local_bits", s.radio.pkt_local);
    get(r, "pkt_global_bits", s.radio.pkt_global);
    get(r, "rician_k", s.radio.rician_k);

    const double g_min_for_defaults = db_to_linear(s.g_min_db);
    s.interferers_up = default_interferers_up(s.p_max, g_min_for_defaults);
    s.interferers_down = default_interferers_down(s.p_max, g_min_for_defaults);
    read_interferers(j, "interferers_up", s.interferers_up);
    read_interferers(j, "interferers_down", s.interferers_down);

    json c = j.value("compute", json::object());
    get(c, "kappa", s.compute.kappa);
    get(c, "cycles_per_bit", s.compute.cycles_per_bit);
    get(c, "cpu_freq_hz", s.compute.cpu_freq);

    json f = j.value("flight", json::object());
    get(f, "rotors", s.flight.rotors);
    get(f, "rotor_diameter_m", s.flight.rotor_diameter);
    get(f, "air_density", s.flight.air_density);
    get(f, "efficiency", s.flight.efficiency);
    get(f, "mass_kg", s.flight.mass);
    get(f, "gravity", s.flight.gravity);
    get(f, "v_max", s.flight.v_max);

    json e = j.value("energy", json::object());
    get(e, "energy_budget_j", s.energy.e_bar);
    get(e, "xi_leader", s.energy.xi_leader);
    get(e, "xi_follower", s.energy.xi_follower);

    json ctl = j.value("control", json::object());
    get(ctl, "tau_s", s.control.tau);
    get(ctl, "xi_control", s.control.xi_control);

    json d = j.value("dataset", json::object());
    get(d, "samples_per_follower", s.dataset.samples_per_follower);
    get(d, "dim", s.dataset.dim);
    get(d, "noise", s.dataset.noise);
    get(d, "feature_scale", s.dataset.feature_scale);
    get(d, "heterogeneity", s.dataset.heterogeneity);
    get(d, "sample_bits", s.dataset.sample_bits);
    get(d, "seed", s.dataset.seed);

    json o = j.value("optimizer", json::object());
    get(o, "c_bar", s.optimizer.c_bar);
    get(o, "max_iters", s.optimizer.max_iters);
    get(o, "step_scale", s.optimizer.step_scale);
    get(o, "inner_max_cycles", s.optimizer.inner_max_cycles);
    get(o, "inner_rel_tol", s.optimizer.inner_rel_tol);
    std::string method = o.value("method", std::string("subgradient"));
    if (method != "subgradient" && method != "ellipsoid")
      throw Error(ErrorKind::kConfig, "invalid scenario:\n  optimizer.method: must be subgradient or ellipsoid");
    s.optimizer.use_ellipsoid = method == "ellipsoid";

    const SwarmScenario defaults = default_scenario();
    s.experiment = defaults.experiment;
    json x = j.value("experiment", json::object());
    get(x, "epsilon", s.experiment.epsilon);
    get(x, "epsilon_list", s.experiment.epsilon_list);
    get(x, "sigma2_list", s.experiment.sigma2_list);
    get(x, "bandwidth_list_hz", s.experiment.bandwidth_list);
    get(x, "samples_k", s.experiment.samples_k);
    get(x, "mc_samples", s.experiment.mc_samples);
    get(x, "mc_runs", s.experiment.mc_runs);
    get(x, "max_rounds", s.experiment.max_rounds);
    get(x, "baseline_draws", s.experiment.baseline_draws);
    get(x, "seed", s.experiment.seed);

    if (auto it = j.find("design"); it != j.end()) {
      get(*it, "p_w", s.design.p);
      get(*it, "p_leader_w", s.design.p_leader);
      get(*it, "beta", s.design.beta);
      get(*it, "v_mps", s.design.v);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("parse error: ") + e.what());
  }
  if (s.design.p_leader == 0.0 && !s.design.p.empty()) s.design.p_leader = s.p_max;
  if (s.design.v == 0.0 && !s.design.p.empty()) s.design.v = s.flight.v_max;
  fill_per_follower(s);
  finalize_scenario(s);
  return s;
}

SwarmScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const SwarmScenario& s) {
  json links = json::array();
  for (const auto& g : s.links)
    links.push_back({{"distance_m", g.distance}, {"theta_follower", g.theta_follower}, {"theta_leader", g.theta_leader}});
  json j = {
      {"n_followers", s.n_followers},
      {"p_max_w", s.p_max},
      {"round_time_s", s.round_time},
      {"pathloss_exp", s.pathloss_exp},
      {"links", links},
      {"antenna",
       {{"sigma2_leader", s.sigma2_leader},
        {"sigma2_follower", s.sigma2_follower},
        {"g_min_db", s.g_min_db},
        {"sections", s.sections},
        {"gain_model", s.gain_model == GainModel::kExact ? "exact" : "sectionalized"}}},
      {"radio",
       {{"bw_up_hz", s.radio.bw_up},
        {"bw_down_hz", s.radio.bw_down},
        {"noise_psd_dbm_hz", s.radio.noise_psd_dbm_hz},
        {"pkt_local_bits", s.radio.pkt_local},
        {"pkt_global_bits", s.radio.pkt_global},
        {"rician_k", s.radio.rician_k}}},
      {"interferers_up", write_interferers(s.interferers_up)},
      {"interferers_down", write_interferers(s.interferers_down)},
      {"compute",
       {{"kappa", s.compute.kappa}, {"cycles_per_bit", s.compute.cycles_per_bit}, {"cpu_freq_hz", s.compute.cpu_freq}}},
      {"flight",
       {{"rotors", s.flight.rotors},
        {"rotor_diameter_m", s.flight.rotor_diameter},
        {"air_density", s.flight.air_density},
        {"efficiency", s.flight.efficiency},
        {"mass_kg", s.flight.mass},
        {"gravity", s.flight.gravity},
        {"v_max", s.flight.v_max}}},
      {"energy",
       {{"energy_budget_j", s.energy.e_bar}, {"xi_leader", s.energy.xi_leader}, {"xi_follower", s.energy.xi_follower}}},
      {"control", {{"tau_s", s.control.tau}, {"xi_control", s.control.xi_control}}},
      {"dataset",
       {{"samples_per_follower", s.dataset.samples_per_follower},
        {"dim", s.dataset.dim},
        {"noise", s.dataset.noise},
        {"feature_scale", s.dataset.feature_scale},
        {"heterogeneity", s.dataset.heterogeneity},
        {"sample_bits", s.dataset.sample_bits},
        {"seed", s.dataset.seed}}},
      {"optimizer",
       {{"c_bar", s.optimizer.c_bar},
        {"max_iters", s.optimizer.max_iters},
        {"step_scale", s.optimizer.step_scale},
        {"inner_max_cycles", s.optimizer.inner_max_cycles},
        {"inner_rel_tol", s.optimizer.inner_rel_tol},
        {"method", s.optimizer.use_ellipsoid ? "ellipsoid" : "subgradient"}}},
      {"experiment",
       {{"epsilon", s.experiment.epsilon},
        {"epsilon_list", s.experiment.epsilon_list},
        {"sigma2_list", s.experiment.sigma2_list},
        {"bandwidth_list_hz", s.experiment.bandwidth_list},
        {"samples_k", s.experiment.samples_k},
        {"mc_samples", s.experiment.mc_samples},
        {"mc_runs", s.experiment.mc_runs},
        {"max_rounds", s.experiment.max_rounds},
        {"baseline_draws", s.experiment.baseline_draws},
        {"seed", s.experiment.seed}}},
      {"design",
       {{"p_w", s.design.p}, {"p_leader_w", s.design.p_leader}, {"beta", s.design.beta}, {"v_mps", s.design.v}}},
  };
  return j.dump(2);
}

}  // namespace uavfl
