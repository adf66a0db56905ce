#ifndef ECCO_SCENARIO_HPP_
#define ECCO_SCENARIO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ecco/accuracy_model.hpp"
#include "ecco/gpu_allocator.hpp"
#include "ecco/grouping.hpp"
#include "ecco/transmission.hpp"
#include "ecco/types.hpp"

namespace ecco {

struct CameraSpec {
  CameraId id;
  Vec2 location;
  SceneVector scene;
  double local_model_acc = 0.0;
  double local_uplink_cap_bps = 0.0;  // 0 = uncapped
  double gpu_pixel_throughput = 8.192e6;
  ProfileBias profile_bias = ProfileBias::resolution;
};

struct TransmissionConfig {
  std::vector<double> resolution_ladder{360, 480, 720, 960};
  std::vector<double> frame_rates{1, 2, 5, 10, 15};
  double bpp_ref = 0.1;
  double alpha_unit_bps = 5e5;  // 0.5 Mbps additive increase per RTT
  double probe_reference_rate_bps = 1e6;
  SamplingConfig fixed_config{5.0, 960.0};  // used by the naive policy
};

struct ScenarioConfig {
  std::string name;
  unsigned seed = 0;
  int num_windows = 1;
  SchedulePolicy policy = SchedulePolicy::ecco;
  bool equal_bandwidth = false;   // force alpha_unit for every flow
  double drift_threshold = 0.25;  // device accuracy below this emits a request
  std::optional<double> response_target_acc;

  ModelParams model;
  AllocatorConfig allocator;
  GroupingConfig grouping;
  TransmissionConfig transmission;

  double shared_capacity_bps = 6e6;
  double rtt_s = 0.05;

  std::vector<CameraSpec> cameras;
  std::vector<DriftEvent> drift_events;

  double window_length_s() const { return allocator.window_duration_s(); }
  const CameraSpec* find_camera(const CameraId& id) const;
  // Throws SchemaError / std::invalid_argument on inconsistent content.
  void validate() const;
};

std::string policy_name(SchedulePolicy policy);
SchedulePolicy parse_policy(const std::string& name);  // throws SchemaError

// Parses and validates a scenario. Unknown fields, type mismatches, dangling
// camera references and out-of-range values raise SchemaError with the field
// path.
ScenarioConfig parse_scenario_json(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace ecco

#endif  // ECCO_SCENARIO_HPP_
