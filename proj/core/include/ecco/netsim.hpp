#ifndef ECCO_NETSIM_HPP_
#define ECCO_NETSIM_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ecco/types.hpp"

namespace ecco {

struct FlowParams {
  std::string id;
  double alpha_bps_per_rtt = 0.0;  // additive increase per RTT, bits/s
  double beta = 0.5;               // multiplicative decrease factor, in (0,1)
};

struct NetTopology {
  double shared_capacity_bps = 0.0;
  std::map<std::string, double> local_caps_bps;  // absent or <= 0 = uncapped
  double rtt_s = 0.05;
};

// One RTT of synchronized-loss AIMD dynamics over a single shared bottleneck.
// Each flow first clamps to its local cap. A fully utilized shared link
// (sum >= capacity) is a congestion signal: every flow cuts to beta * rate.
// Otherwise flows grow by alpha, except flows pinned at their local cap,
// which hold. `caps` aligns with `flows`; use +infinity for uncapped.
void aimd_step(std::vector<double>& rates_bps, const std::vector<FlowParams>& flows,
               const std::vector<double>& caps_bps, double shared_capacity_bps);

struct FlowTrace {
  std::vector<std::string> flow_ids;
  double dt_s = 0.0;
  std::vector<std::vector<double>> rates_bps;   // [step][flow], post-step rates
  std::map<std::string, double> mean_rate_bps;  // over the measurement half
  bool short_window = false;  // set when duration < 100 RTTs

  void write_csv(std::ostream& os) const;  // time_s,flow_id,rate_bps
};

// Runs aimd_step for duration_s (dt = RTT) from zero initial rates and
// reports per-flow mean rates over the second half of the window, discarding
// the convergence transient.
FlowTrace simulate_window(const std::vector<FlowParams>& flows,
                          const NetTopology& topology, double duration_s);

// Water-filling steady-state oracle: weights w_i = alpha_i / (1 - beta_i);
// flows whose proportional share exceeds their local cap are pinned at the
// cap and the residual capacity is redistributed until a fixpoint.
std::map<std::string, double> analytic_steady_state(const std::vector<FlowParams>& flows,
                                                    const NetTopology& topology);

}  // namespace ecco

#endif  // ECCO_NETSIM_HPP_
