#include "ecco/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ecco {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError(path, what);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double opt_number(const json& obj, const char* key, const std::string& path,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj.at(key), path + "." + key);
}

int opt_int(const json& obj, const char* key, const std::string& path, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj.at(key);
  if (!j.is_number_integer()) fail(path + "." + key, "expected an integer");
  return j.get<int>();
}

bool opt_bool(const json& obj, const char* key, const std::string& path, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj.at(key);
  if (!j.is_boolean()) fail(path + "." + key, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_number_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) { ok = true; break; }
    if (!ok) fail(path + "." + key, "unknown field");
  }
}

Vec2 parse_location(const json& j, const std::string& path) {
  const auto values = get_number_array(j, path);
  if (values.size() != 2) fail(path, "expected [x, y]");
  return {values[0], values[1]};
}

ModelParams parse_model(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"learning_rate_k", "similarity_lambda", "acc_floor", "acc_ceil",
                  "cluster_similarity_threshold"});
  ModelParams params;
  params.learning_rate_k = opt_number(j, "learning_rate_k", path, params.learning_rate_k);
  params.similarity_lambda =
      opt_number(j, "similarity_lambda", path, params.similarity_lambda);
  params.acc_floor = opt_number(j, "acc_floor", path, params.acc_floor);
  params.acc_ceil = opt_number(j, "acc_ceil", path, params.acc_ceil);
  params.cluster_similarity_threshold = opt_number(
      j, "cluster_similarity_threshold", path, params.cluster_similarity_threshold);
  return params;
}

AllocatorConfig parse_allocator(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"obj_alpha", "size_exponent_beta", "micro_windows",
                  "micro_window_duration_s", "gpu_count", "fairness_bonus"});
  AllocatorConfig cfg;
  cfg.obj_alpha = opt_number(j, "obj_alpha", path, cfg.obj_alpha);
  cfg.size_exponent_beta = opt_number(j, "size_exponent_beta", path, cfg.size_exponent_beta);
  cfg.micro_windows = opt_int(j, "micro_windows", path, cfg.micro_windows);
  cfg.micro_window_duration_s =
      opt_number(j, "micro_window_duration_s", path, cfg.micro_window_duration_s);
  cfg.gpu_count = opt_int(j, "gpu_count", path, cfg.gpu_count);
  cfg.fairness_bonus = opt_bool(j, "fairness_bonus", path, cfg.fairness_bonus);
  return cfg;
}

GroupingConfig parse_grouping(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"epsilon_s", "delta_m", "drop_threshold_p"});
  GroupingConfig cfg;
  cfg.epsilon_s = opt_number(j, "epsilon_s", path, cfg.epsilon_s);
  cfg.delta_m = opt_number(j, "delta_m", path, cfg.delta_m);
  cfg.drop_threshold_p = opt_number(j, "drop_threshold_p", path, cfg.drop_threshold_p);
  return cfg;
}

TransmissionConfig parse_transmission(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"resolution_ladder", "frame_rates", "bpp_ref", "alpha_unit_bps",
                  "probe_reference_rate_bps", "fixed_config"});
  TransmissionConfig cfg;
  if (j.contains("resolution_ladder"))
    cfg.resolution_ladder =
        get_number_array(j.at("resolution_ladder"), path + ".resolution_ladder");
  if (j.contains("frame_rates"))
    cfg.frame_rates = get_number_array(j.at("frame_rates"), path + ".frame_rates");
  cfg.bpp_ref = opt_number(j, "bpp_ref", path, cfg.bpp_ref);
  cfg.alpha_unit_bps = opt_number(j, "alpha_unit_bps", path, cfg.alpha_unit_bps);
  cfg.probe_reference_rate_bps =
      opt_number(j, "probe_reference_rate_bps", path, cfg.probe_reference_rate_bps);
  if (j.contains("fixed_config")) {
    const std::string sub = path + ".fixed_config";
    const json& fc = j.at("fixed_config");
    expect_object(fc, sub);
    reject_unknown(fc, sub, {"frame_rate", "resolution"});
    cfg.fixed_config.frame_rate =
        opt_number(fc, "frame_rate", sub, cfg.fixed_config.frame_rate);
    cfg.fixed_config.resolution =
        opt_number(fc, "resolution", sub, cfg.fixed_config.resolution);
  }
  return cfg;
}

ProfileBias parse_bias(const std::string& name, const std::string& path) {
  if (name == "resolution") return ProfileBias::resolution;
  if (name == "frame_rate") return ProfileBias::frame_rate;
  fail(path, "unknown profile bias " + name);
}

CameraSpec parse_camera(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path,
                 {"id", "location", "scene", "local_model_acc", "local_uplink_cap_bps",
                  "gpu_pixel_throughput", "profile_bias"});
  CameraSpec cam;
  if (!j.contains("id")) fail(path + ".id", "required");
  cam.id = get_string(j.at("id"), path + ".id");
  if (cam.id.empty()) fail(path + ".id", "must not be empty");
  if (!j.contains("location")) fail(path + ".location", "required");
  cam.location = parse_location(j.at("location"), path + ".location");
  if (!j.contains("scene")) fail(path + ".scene", "required");
  cam.scene = get_number_array(j.at("scene"), path + ".scene");
  if (cam.scene.empty()) fail(path + ".scene", "must not be empty");
  cam.local_model_acc = opt_number(j, "local_model_acc", path, cam.local_model_acc);
  cam.local_uplink_cap_bps =
      opt_number(j, "local_uplink_cap_bps", path, cam.local_uplink_cap_bps);
  cam.gpu_pixel_throughput =
      opt_number(j, "gpu_pixel_throughput", path, cam.gpu_pixel_throughput);
  if (j.contains("profile_bias"))
    cam.profile_bias = parse_bias(
        get_string(j.at("profile_bias"), path + ".profile_bias"), path + ".profile_bias");
  return cam;
}

DriftEvent parse_drift_event(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"camera", "time_s", "new_scene", "acc_drop"});
  DriftEvent ev;
  if (!j.contains("camera")) fail(path + ".camera", "required");
  ev.camera = get_string(j.at("camera"), path + ".camera");
  if (!j.contains("time_s")) fail(path + ".time_s", "required");
  ev.time_s = get_number(j.at("time_s"), path + ".time_s");
  if (!j.contains("new_scene")) fail(path + ".new_scene", "required");
  ev.new_scene = get_number_array(j.at("new_scene"), path + ".new_scene");
  if (!j.contains("acc_drop")) fail(path + ".acc_drop", "required");
  ev.acc_drop = get_number(j.at("acc_drop"), path + ".acc_drop");
  return ev;
}

}  // namespace

const CameraSpec* ScenarioConfig::find_camera(const CameraId& id) const {
  for (const auto& cam : cameras)
    if (cam.id == id) return &cam;
  return nullptr;
}

void ScenarioConfig::validate() const {
  if (num_windows < 1) throw SchemaError("num_windows", "must be >= 1");
  if (drift_threshold < 0.0 || drift_threshold > 1.0)
    throw SchemaError("drift_threshold", "must be in [0, 1]");
  if (response_target_acc && (*response_target_acc <= 0.0 || *response_target_acc > 1.0))
    throw SchemaError("response_target_acc", "must be in (0, 1]");
  try {
    allocator.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("allocator", e.what());
  }
  if (model.learning_rate_k <= 0.0) throw SchemaError("model.learning_rate_k", "must be > 0");
  if (model.similarity_lambda <= 0.0)
    throw SchemaError("model.similarity_lambda", "must be > 0");
  if (model.acc_floor < 0.0 || model.acc_floor >= model.acc_ceil || model.acc_ceil > 1.0)
    throw SchemaError("model", "needs 0 <= acc_floor < acc_ceil <= 1");
  if (model.cluster_similarity_threshold <= 0.0 || model.cluster_similarity_threshold > 1.0)
    throw SchemaError("model.cluster_similarity_threshold", "must be in (0, 1]");
  if (grouping.epsilon_s < 0.0) throw SchemaError("grouping.epsilon_s", "must be >= 0");
  if (grouping.delta_m < 0.0) throw SchemaError("grouping.delta_m", "must be >= 0");
  if (grouping.drop_threshold_p <= 0.0)
    throw SchemaError("grouping.drop_threshold_p", "must be > 0");
  if (transmission.resolution_ladder.empty())
    throw SchemaError("transmission.resolution_ladder", "must not be empty");
  if (transmission.frame_rates.empty())
    throw SchemaError("transmission.frame_rates", "must not be empty");
  for (double q : transmission.resolution_ladder)
    if (q <= 0.0) throw SchemaError("transmission.resolution_ladder", "entries must be > 0");
  for (double f : transmission.frame_rates)
    if (f <= 0.0) throw SchemaError("transmission.frame_rates", "entries must be > 0");
  if (transmission.bpp_ref <= 0.0) throw SchemaError("transmission.bpp_ref", "must be > 0");
  if (transmission.alpha_unit_bps <= 0.0)
    throw SchemaError("transmission.alpha_unit_bps", "must be > 0");
  if (transmission.probe_reference_rate_bps <= 0.0)
    throw SchemaError("transmission.probe_reference_rate_bps", "must be > 0");
  if (transmission.fixed_config.frame_rate <= 0.0 ||
      transmission.fixed_config.resolution <= 0.0)
    throw SchemaError("transmission.fixed_config", "must be positive");
  if (shared_capacity_bps <= 0.0)
    throw SchemaError("shared_capacity_bps", "must be > 0");
  if (rtt_s <= 0.0) throw SchemaError("rtt_s", "must be > 0");
  if (cameras.empty()) throw SchemaError("cameras", "must not be empty");

  std::set<CameraId> seen;
  const std::size_t dims = cameras.front().scene.size();
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const auto& cam = cameras[i];
    const std::string path = "cameras[" + std::to_string(i) + "]";
    if (!seen.insert(cam.id).second) throw SchemaError(path + ".id", "duplicate camera id");
    if (cam.scene.size() != dims)
      throw SchemaError(path + ".scene", "scene vectors must share one dimension");
    if (cam.local_model_acc < 0.0 || cam.local_model_acc > 1.0)
      throw SchemaError(path + ".local_model_acc", "must be in [0, 1]");
    if (cam.local_uplink_cap_bps < 0.0)
      throw SchemaError(path + ".local_uplink_cap_bps", "must be >= 0");
    if (cam.gpu_pixel_throughput <= 0.0)
      throw SchemaError(path + ".gpu_pixel_throughput", "must be > 0");
  }
  for (std::size_t i = 0; i < drift_events.size(); ++i) {
    const auto& ev = drift_events[i];
    const std::string path = "drift_events[" + std::to_string(i) + "]";
    if (!find_camera(ev.camera))
      throw SchemaError(path + ".camera", "references unknown camera " + ev.camera);
    if (ev.time_s < 0.0) throw SchemaError(path + ".time_s", "must be >= 0");
    if (ev.new_scene.size() != dims)
      throw SchemaError(path + ".new_scene", "scene vectors must share one dimension");
    if (ev.acc_drop < 0.0) throw SchemaError(path + ".acc_drop", "must be >= 0");
  }
}

std::string policy_name(SchedulePolicy policy) {
  switch (policy) {
    case SchedulePolicy::ecco: return "ecco";
    case SchedulePolicy::naive: return "naive";
    case SchedulePolicy::total_acc_greedy: return "total_acc_greedy";
  }
  return "?";
}

SchedulePolicy parse_policy(const std::string& name) {
  if (name == "ecco") return SchedulePolicy::ecco;
  if (name == "naive") return SchedulePolicy::naive;
  if (name == "total_acc_greedy") return SchedulePolicy::total_acc_greedy;
  throw SchemaError("policy", "unknown policy " + name +
                                  " (expected ecco|naive|total_acc_greedy)");
}

ScenarioConfig parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("scenario", std::string("invalid JSON: ") + e.what());
  }
  expect_object(root, "scenario");
  reject_unknown(root, "scenario",
                 {"name", "seed", "num_windows", "policy", "equal_bandwidth",
                  "drift_threshold", "response_target_acc", "model", "allocator",
                  "grouping", "transmission", "shared_capacity_bps", "rtt_s",
                  "window_length_s", "cameras", "drift_events"});

  ScenarioConfig cfg;
  if (root.contains("name")) cfg.name = get_string(root.at("name"), "name");
  if (root.contains("seed")) {
    const json& j = root.at("seed");
    if (!j.is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = j.get<unsigned>();
  }
  cfg.num_windows = opt_int(root, "num_windows", "", cfg.num_windows);
  if (root.contains("policy"))
    cfg.policy = parse_policy(get_string(root.at("policy"), "policy"));
  cfg.equal_bandwidth = opt_bool(root, "equal_bandwidth", "", cfg.equal_bandwidth);
  cfg.drift_threshold = opt_number(root, "drift_threshold", "", cfg.drift_threshold);
  if (root.contains("response_target_acc"))
    cfg.response_target_acc =
        get_number(root.at("response_target_acc"), "response_target_acc");
  if (root.contains("model")) cfg.model = parse_model(root.at("model"), "model");
  if (root.contains("allocator"))
    cfg.allocator = parse_allocator(root.at("allocator"), "allocator");
  if (root.contains("grouping"))
    cfg.grouping = parse_grouping(root.at("grouping"), "grouping");
  if (root.contains("transmission"))
    cfg.transmission = parse_transmission(root.at("transmission"), "transmission");
  cfg.shared_capacity_bps =
      opt_number(root, "shared_capacity_bps", "", cfg.shared_capacity_bps);
  cfg.rtt_s = opt_number(root, "rtt_s", "", cfg.rtt_s);

  if (!root.contains("cameras")) fail("cameras", "required");
  const json& cams = root.at("cameras");
  if (!cams.is_array()) fail("cameras", "expected an array");
  for (std::size_t i = 0; i < cams.size(); ++i)
    cfg.cameras.push_back(parse_camera(cams[i], "cameras[" + std::to_string(i) + "]"));
  if (root.contains("drift_events")) {
    const json& evs = root.at("drift_events");
    if (!evs.is_array()) fail("drift_events", "expected an array");
    for (std::size_t i = 0; i < evs.size(); ++i)
      cfg.drift_events.push_back(
          parse_drift_event(evs[i], "drift_events[" + std::to_string(i) + "]"));
  }

  // window_length_s is derived from the allocator settings; accept an explicit
  // value only when it agrees.
  if (root.contains("window_length_s")) {
    const double given = get_number(root.at("window_length_s"), "window_length_s");
    const double derived = cfg.window_length_s();
    if (std::abs(given - derived) > 1e-9 * std::max(1.0, derived))
      fail("window_length_s",
           "conflicts with micro_windows * micro_window_duration_s = " +
               std::to_string(derived));
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_scenario_json(buffer.str());
}

}  // namespace ecco
