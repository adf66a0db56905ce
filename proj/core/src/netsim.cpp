#include "ecco/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "ecco/metrics.hpp"

namespace ecco {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const std::vector<FlowParams>& flows, const NetTopology& topology) {
  if (!(topology.shared_capacity_bps > 0.0))
    throw std::invalid_argument("netsim: shared capacity must be positive");
  if (!(topology.rtt_s > 0.0))
    throw std::invalid_argument("netsim: rtt must be positive");
  std::set<std::string> ids;
  for (const auto& f : flows) {
    if (!(f.alpha_bps_per_rtt > 0.0))
      throw std::invalid_argument("netsim: flow " + f.id + ": alpha must be positive");
    if (!(f.beta > 0.0 && f.beta < 1.0))
      throw std::invalid_argument("netsim: flow " + f.id + ": beta must be in (0,1)");
    if (!ids.insert(f.id).second)
      throw std::invalid_argument("netsim: duplicate flow id " + f.id);
  }
}

std::vector<double> resolve_caps(const std::vector<FlowParams>& flows,
                                 const NetTopology& topology) {
  std::vector<double> caps(flows.size(), kInf);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto it = topology.local_caps_bps.find(flows[i].id);
    if (it != topology.local_caps_bps.end() && it->second > 0.0) caps[i] = it->second;
  }
  return caps;
}

}  // namespace

void aimd_step(std::vector<double>& rates_bps, const std::vector<FlowParams>& flows,
               const std::vector<double>& caps_bps, double shared_capacity_bps) {
  if (rates_bps.size() != flows.size() || caps_bps.size() != flows.size())
    throw std::invalid_argument("aimd_step: state size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    rates_bps[i] = std::min(rates_bps[i], caps_bps[i]);
    total += rates_bps[i];
  }
  // A fully utilized bottleneck already drops packets, so >= counts as the
  // synchronized congestion signal.
  if (total >= shared_capacity_bps) {
    for (std::size_t i = 0; i < flows.size(); ++i) rates_bps[i] *= flows[i].beta;
  } else {
    for (std::size_t i = 0; i < flows.size(); ++i)
      rates_bps[i] = std::min(rates_bps[i] + flows[i].alpha_bps_per_rtt, caps_bps[i]);
  }
}

FlowTrace simulate_window(const std::vector<FlowParams>& flows,
                          const NetTopology& topology, double duration_s) {
  validate(flows, topology);
  if (!(duration_s > 0.0))
    throw std::invalid_argument("simulate_window: duration must be positive");

  FlowTrace trace;
  trace.dt_s = topology.rtt_s;
  for (const auto& f : flows) trace.flow_ids.push_back(f.id);

  const int steps = static_cast<int>(std::llround(duration_s / topology.rtt_s));
  trace.short_window = steps < 100;
  if (flows.empty()) return trace;

  const auto caps = resolve_caps(flows, topology);
  std::vector<double> rates(flows.size(), 0.0);
  trace.rates_bps.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    aimd_step(rates, flows, caps, topology.shared_capacity_bps);
    trace.rates_bps.push_back(rates);
  }

  const int measure_from = steps / 2;
  std::vector<double> sums(flows.size(), 0.0);
  for (int s = measure_from; s < steps; ++s)
    for (std::size_t i = 0; i < flows.size(); ++i) sums[i] += trace.rates_bps[s][i];
  const int measured = std::max(1, steps - measure_from);
  for (std::size_t i = 0; i < flows.size(); ++i)
    trace.mean_rate_bps[flows[i].id] = sums[i] / measured;
  return trace;
}

std::map<std::string, double> analytic_steady_state(const std::vector<FlowParams>& flows,
                                                    const NetTopology& topology) {
  validate(flows, topology);
  const auto caps = resolve_caps(flows, topology);

  std::map<std::string, double> rates;
  std::vector<bool> pinned(flows.size(), false);
  double residual = topology.shared_capacity_bps;
  while (true) {
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < flows.size(); ++i)
      if (!pinned[i]) weight_sum += flows[i].alpha_bps_per_rtt / (1.0 - flows[i].beta);
    if (weight_sum <= 0.0) break;

    bool pinned_any = false;
    for (std::size_t i = 0; i < flows.size(); ++i) {
      if (pinned[i]) continue;
      const double w = flows[i].alpha_bps_per_rtt / (1.0 - flows[i].beta);
      const double share = residual * w / weight_sum;
      if (caps[i] <= share) {
        rates[flows[i].id] = caps[i];
        residual -= caps[i];
        pinned[i] = true;
        pinned_any = true;
      }
    }
    if (!pinned_any) {
      for (std::size_t i = 0; i < flows.size(); ++i) {
        if (pinned[i]) continue;
        const double w = flows[i].alpha_bps_per_rtt / (1.0 - flows[i].beta);
        rates[flows[i].id] = residual * w / weight_sum;
      }
      break;
    }
  }
  return rates;
}

void FlowTrace::write_csv(std::ostream& os) const {
  os << "time_s,flow_id,rate_bps\n";
  for (std::size_t s = 0; s < rates_bps.size(); ++s) {
    const double t = (s + 1) * dt_s;
    for (std::size_t i = 0; i < flow_ids.size(); ++i)
      os << format_value(t) << ',' << flow_ids[i] << ','
         << format_value(rates_bps[s][i]) << '\n';
  }
}

}  // namespace ecco
