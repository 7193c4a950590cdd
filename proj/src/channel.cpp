#include "uavfl/channel.hpp"

#include <cmath>
#include <numbers>

namespace uavfl {

double antenna_gain_exact(const AntennaPattern& pattern, double total_angle) {
  if (std::abs(total_angle) > 1.0) return pattern.g_min;
  const double c = std::cos(0.5 * std::numbers::pi * total_angle);
  return c * c;
}

double antenna_gain_sectionalized(const AntennaPattern& pattern, double total_angle) {
  const double a = std::abs(total_angle);
  if (a > 1.0) return pattern.g_min;
  const int m_sections = std::max(pattern.sections, 1);
  const double m = std::floor(a * m_sections);
  const double c = std::cos(0.5 * std::numbers::pi * m / m_sections);
  return c * c;
}

namespace {

double gain(const SwarmScenario& s, const AntennaPattern& pattern, double deviation) {
  const double angle = pattern.theta_init + deviation;
  return s.gain_model == GainModel::kExact ? antenna_gain_exact(pattern, angle)
                                           : antenna_gain_sectionalized(pattern, angle);
}

double interference(const std::vector<Interferer>& field, const std::vector<double>& fading,
                    const std::vector<bool>& active, double alpha) {
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    if (!active[k]) continue;
    const Interferer& it = field[k];
    sum += it.power * fading[k] * std::pow(it.distance, -alpha) * it.gain_product;
  }
  return sum;
}

}  // namespace

ChannelSampler::ChannelSampler(const SwarmScenario& scenario, std::uint64_t seed)
    : scenario_(&scenario), engine_(seed) {
  const double k = scenario.radio.rician_k;
  los_amp_ = std::sqrt(k / (k + 1.0));
  // per real dimension, so that E|scatter|^2 = 1/(K+1)
  scatter_amp_ = std::sqrt(0.5 / (k + 1.0));
}

double ChannelSampler::rician_power() {
  const double re = los_amp_ + scatter_amp_ * normal_(engine_);
  const double im = scatter_amp_ * normal_(engine_);
  return re * re + im * im;
}

void ChannelSampler::next(ChannelDraw& d) {
  const SwarmScenario& s = *scenario_;
  const auto n = static_cast<std::size_t>(s.n_followers);
  d.fading_up.resize(n);
  d.fading_down.resize(n);
  d.fading_int_up.resize(s.interferers_up.size());
  d.fading_int_down.resize(s.interferers_down.size());
  d.angle_dev.resize(n + 1);
  d.active_up.resize(s.interferers_up.size());
  d.active_down.resize(s.interferers_down.size());

  d.angle_dev[0] = std::sqrt(s.sigma2_leader) * normal_(engine_);
  for (std::size_t i = 0; i < n; ++i)
    d.angle_dev[i + 1] = std::sqrt(s.sigma2_follower[i]) * normal_(engine_);
  for (std::size_t i = 0; i < n; ++i) {
    d.fading_up[i] = rician_power();
    d.fading_down[i] = rician_power();
  }
  for (std::size_t k = 0; k < d.fading_int_up.size(); ++k) {
    d.fading_int_up[k] = rician_power();
    d.active_up[k] = uniform_(engine_) < s.interferers_up[k].active_prob;
  }
  for (std::size_t k = 0; k < d.fading_int_down.size(); ++k) {
    d.fading_int_down[k] = rician_power();
    d.active_down[k] = uniform_(engine_) < s.interferers_down[k].active_prob;
  }
}

ChannelDraw ChannelSampler::next() {
  ChannelDraw d;
  next(d);
  return d;
}

ChannelDraw sample_channel_draw(const SwarmScenario& scenario, std::uint64_t seed) {
  ChannelSampler sampler(scenario, seed);
  return sampler.next();
}

LinkBudget uplink_budget(int i, const ChannelDraw& draw, const SwarmScenario& s) {
  const auto idx = static_cast<std::size_t>(i);
  const double g_tx = gain(s, s.follower_antenna(i), draw.angle_dev[idx + 1]);
  const double g_rx = gain(s, s.leader_antenna(i), draw.angle_dev[0]);
  LinkBudget link;
  link.signal = draw.fading_up[idx] * std::pow(s.links[idx].distance, -s.pathloss_exp) * g_tx * g_rx;
  link.impairment = interference(s.interferers_up, draw.fading_int_up, draw.active_up, s.pathloss_exp) +
                    s.radio.bw_up * s.radio.noise_psd;
  return link;
}

LinkBudget downlink_budget(int i, const ChannelDraw& draw, const SwarmScenario& s) {
  const auto idx = static_cast<std::size_t>(i);
  const double g_tx = gain(s, s.leader_antenna(i), draw.angle_dev[0]);
  const double g_rx = gain(s, s.follower_antenna(i), draw.angle_dev[idx + 1]);
  LinkBudget link;
  link.signal = draw.fading_down[idx] * std::pow(s.links[idx].distance, -s.pathloss_exp) * g_tx * g_rx;
  link.impairment =
      interference(s.interferers_down, draw.fading_int_down, draw.active_down, s.pathloss_exp) +
      s.radio.bw_down * s.radio.noise_psd;
  return link;
}

double transmission_delay(double bits, double bandwidth, double power, const LinkBudget& link) {
  const double sinr = power * link.signal / link.impairment;
  // log1p keeps the rate positive for tiny SINR where log2(1 + x) would round to zero
  return bits * std::numbers::ln2 / (bandwidth * std::log1p(sinr));
}

double uplink_delay(int i, const ChannelDraw& draw, const DesignVector& design,
                    const SwarmScenario& scenario) {
  const double p = design.p.at(static_cast<std::size_t>(i));
  if (!(p > 0.0)) throw Error(ErrorKind::kArgument, "uplink_delay: transmit power must be positive");
  return transmission_delay(scenario.radio.pkt_local, scenario.radio.bw_up, p,
                            uplink_budget(i, draw, scenario));
}

double downlink_delay(int i, const ChannelDraw& draw, const DesignVector& design,
                      const SwarmScenario& scenario) {
  if (!(design.p_leader > 0.0))
    throw Error(ErrorKind::kArgument, "downlink_delay: leader transmit power must be positive");
  return transmission_delay(scenario.radio.pkt_global, scenario.radio.bw_down, design.p_leader,
                            downlink_budget(i, draw, scenario));
}

SuccessEstimate estimate_success(const DesignVector& design, const SwarmScenario& scenario,
                                 int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error(ErrorKind::kArgument, "estimate_success: n_samples must be >= 1");
  const auto n = static_cast<std::size_t>(scenario.n_followers);
  std::vector<long long> joint(n, 0), up(n, 0), down(n, 0);
  std::vector<double> delay_sum(n, 0.0);
  const double t_up = scenario.uplink_budget(design.beta);
  const double t_down = scenario.downlink_budget(design.beta);

  ChannelSampler sampler(scenario, seed);
  ChannelDraw draw;
  for (int k = 0; k < n_samples; ++k) {
    sampler.next(draw);
    for (std::size_t i = 0; i < n; ++i) {
      const int ii = static_cast<int>(i);
      const double t_ul = uplink_delay(ii, draw, design, scenario);
      const bool ok_up = t_ul <= t_up;
      delay_sum[i] += t_ul;
      const bool ok_down = downlink_delay(ii, draw, design, scenario) <= t_down;
      up[i] += ok_up;
      down[i] += ok_down;
      joint[i] += ok_up && ok_down;
    }
  }
  SuccessEstimate out;
  out.n_samples = n_samples;
  for (std::size_t i = 0; i < n; ++i) {
    out.joint.push_back(static_cast<double>(joint[i]) / n_samples);
    out.uplink.push_back(static_cast<double>(up[i]) / n_samples);
    out.downlink.push_back(static_cast<double>(down[i]) / n_samples);
    out.mean_uplink_delay.push_back(delay_sum[i] / n_samples);
  }
  return out;
}

double estimate_success_prob(int i, const DesignVector& design, const SwarmScenario& scenario,
                             int n_samples, std::uint64_t seed) {
  return estimate_success(design, scenario, n_samples, seed).joint.at(static_cast<std::size_t>(i));
}

}  // namespace uavfl
