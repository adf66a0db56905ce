#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecco/orchestrator.hpp"
#include "ecco/scenario.hpp"
#include "ecco/types.hpp"

using namespace ecco;

namespace {

std::string scenario_path(const std::string& name) {
  return std::string(ECCO_SCENARIO_DIR) + "/" + name;
}

CameraSpec cam_spec(const CameraId& id, double x, double y, SceneVector scene,
                    double acc, double uplink_cap = 0.0) {
  CameraSpec spec;
  spec.id = id;
  spec.location = {x, y};
  spec.scene = std::move(scene);
  spec.local_model_acc = acc;
  spec.local_uplink_cap_bps = uplink_cap;
  return spec;
}

ScenarioConfig make_scenario(int num_windows, std::vector<CameraSpec> cameras,
                             SchedulePolicy policy = SchedulePolicy::ecco) {
  ScenarioConfig cfg;
  cfg.name = "unit";
  cfg.num_windows = num_windows;
  cfg.policy = policy;
  cfg.cameras = std::move(cameras);
  return cfg;
}

std::vector<MetricsTrace::Row> rows_of(const MetricsTrace& trace,
                                       MetricsTrace::Kind kind) {
  std::vector<MetricsTrace::Row> out;
  for (const auto& r : trace.rows)
    if (r.kind == kind) out.push_back(r);
  return out;
}

std::string trace_csv(const MetricsTrace& trace) {
  std::ostringstream os;
  trace.write_csv(os);
  return os.str();
}

}  // namespace

TEST_CASE("drift detection fires strictly below the threshold") {
  CameraState cam;
  cam.id = "c";
  cam.location = {3.0, 4.0};
  cam.scene = {0.2, 0.8};
  cam.local_model_acc = 0.2;

  const auto request = detect_drift(cam, 0.25, 42.0);
  REQUIRE(request.has_value());
  CHECK(request->camera == "c");
  CHECK(request->t == 42.0);
  CHECK(request->loc.x == 3.0);
  CHECK(request->loc.y == 4.0);
  CHECK(request->subsamples == SceneVector{0.2, 0.8});
  CHECK(request->acc == 0.2);

  cam.local_model_acc = 0.25;  // at the threshold: still serving well enough
  CHECK_FALSE(detect_drift(cam, 0.25, 42.0).has_value());
  cam.local_model_acc = 0.4;
  CHECK_FALSE(detect_drift(cam, 0.25, 42.0).has_value());
}

TEST_CASE("a single degraded camera is grouped, trained, and improves") {
  Simulation sim(make_scenario(5, {cam_spec("solo", 0, 0, {0.0, 0.0}, 0.1)}));
  sim.run();
  CHECK(sim.windows_run() == 5);
  const MetricsTrace& trace = sim.trace();

  const auto requests = rows_of(trace, MetricsTrace::Kind::request);
  REQUIRE(requests.size() == 1);
  CHECK(requests[0].window == 0);
  CHECK(requests[0].time_s == 0.0);
  CHECK(requests[0].camera == "solo");
  CHECK(requests[0].v1 == 0.1);

  const auto created = rows_of(trace, MetricsTrace::Kind::new_job);
  REQUIRE(created.size() == 1);
  CHECK(created[0].window == 0);
  CHECK(created[0].time_s == 0.0);
  CHECK(created[0].job == 0);

  const auto micros = rows_of(trace, MetricsTrace::Kind::micro);
  CHECK(micros.size() == 5 * 10);
  for (const auto& r : micros) {
    if (r.window != 0) continue;
    CHECK(r.job == 0);
    CHECK(r.time_s == doctest::Approx(6.0 * (r.v1 + 1)));
  }

  const auto marks = rows_of(trace, MetricsTrace::Kind::job_window);
  REQUIRE(marks.size() == 5);
  for (const auto& r : marks) {
    CHECK(r.job == 0);
    CHECK(r.v1 == 1.0);                                // one member
    CHECK(r.v2 == doctest::Approx(1.0).epsilon(1e-12));  // full GPU share
    CHECK(r.v3 == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(r.v5 == 10.0);  // every micro-window
    CHECK(r.v4 > 0.0);    // bandwidth was actually delivered
  }

  const auto acc = rows_of(trace, MetricsTrace::Kind::accuracy);
  REQUIRE(acc.size() == 5);
  for (std::size_t i = 1; i < acc.size(); ++i)
    CHECK(acc[i].v1 >= acc[i - 1].v1 - 1e-12);
  CHECK(acc.back().v1 > 0.3);  // training on its own scene pays off

  REQUIRE(sim.jobs().size() == 1);
  CHECK(sim.jobs().begin()->second.member_count() == 1);
}

TEST_CASE("healthy cameras produce no requests, jobs, or training") {
  Simulation sim(make_scenario(2, {cam_spec("fine", 0, 0, {0.0}, 0.5)}));
  sim.run();
  const MetricsTrace& trace = sim.trace();
  CHECK(rows_of(trace, MetricsTrace::Kind::request).empty());
  CHECK(rows_of(trace, MetricsTrace::Kind::micro).empty());
  CHECK(rows_of(trace, MetricsTrace::Kind::job_window).empty());
  const auto acc = rows_of(trace, MetricsTrace::Kind::accuracy);
  REQUIRE(acc.size() == 2);
  CHECK(acc[0].v1 == 0.5);
  CHECK(acc[1].v1 == 0.5);
  CHECK(acc[0].job == -1);
  CHECK(sim.jobs().empty());
}

TEST_CASE("a mid-window drift event takes effect at the next window boundary") {
  ScenarioConfig cfg = make_scenario(4, {cam_spec("cam", 0, 0, {0.0, 0.0}, 0.5)});
  DriftEvent event;
  event.camera = "cam";
  event.time_s = 90.0;  // inside window 1
  event.new_scene = {0.4, 0.0};
  event.acc_drop = 0.4;
  cfg.drift_events = {event};

  Simulation sim(cfg);
  sim.run();
  const auto requests = rows_of(sim.trace(), MetricsTrace::Kind::request);
  REQUIRE(requests.size() == 1);
  // Applied when window 2 opens, but stamped with the event's own time so
  // response measurements start from the drift.
  CHECK(requests[0].window == 2);
  CHECK(requests[0].time_s == 90.0);
  CHECK(requests[0].v1 == doctest::Approx(0.1));

  const auto created = rows_of(sim.trace(), MetricsTrace::Kind::new_job);
  REQUIRE(created.size() == 1);
  CHECK(created[0].window == 2);
  CHECK(created[0].time_s == 120.0);
}

TEST_CASE("GPU shares and micro-windows are conserved each window") {
  Simulation sim(Simulation(load_scenario(scenario_path("drift_recovery.json"))));
  sim.run();
  const MetricsTrace& trace = sim.trace();

  std::map<int, double> share_sum;
  std::map<int, double> micro_sum;
  for (const auto& r : rows_of(trace, MetricsTrace::Kind::job_window)) {
    share_sum[r.window] += r.v2;
    micro_sum[r.window] += r.v5;
    CHECK(r.v3 == doctest::Approx(r.v2 * 60.0).epsilon(1e-9));
  }
  REQUIRE(!share_sum.empty());
  for (const auto& [window, total] : share_sum)
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& [window, total] : micro_sum)
    CHECK(total == doctest::Approx(10.0).epsilon(1e-12));

  // Each window also reports exactly one accuracy sample per camera.
  std::map<int, int> acc_rows;
  for (const auto& r : rows_of(trace, MetricsTrace::Kind::accuracy))
    ++acc_rows[r.window];
  for (const auto& [window, count] : acc_rows) CHECK(count == 2);
}

TEST_CASE("rows within a window follow the control-loop order") {
  Simulation sim(load_scenario(scenario_path("drift_recovery.json")));
  sim.run();
  const auto& rows = sim.trace().rows;

  std::map<int, std::size_t> last_routing;   // request/join/new_job at window start
  std::map<int, std::size_t> first_micro, last_micro;
  std::map<int, std::size_t> first_accuracy;
  std::map<int, std::size_t> first_regroup;  // remove/terminate at window end
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double t0 = r.window * 60.0;
    switch (r.kind) {
      case MetricsTrace::Kind::request:
      case MetricsTrace::Kind::join:
      case MetricsTrace::Kind::new_job:
        if (r.time_s <= t0) last_routing[r.window] = i;
        break;
      case MetricsTrace::Kind::micro:
        if (!first_micro.count(r.window)) first_micro[r.window] = i;
        last_micro[r.window] = i;
        break;
      case MetricsTrace::Kind::accuracy:
        if (!first_accuracy.count(r.window)) first_accuracy[r.window] = i;
        break;
      case MetricsTrace::Kind::remove:
      case MetricsTrace::Kind::terminate:
        if (!first_regroup.count(r.window)) first_regroup[r.window] = i;
        break;
      default:
        break;
    }
  }
  REQUIRE(!first_micro.empty());
  for (const auto& [window, idx] : first_micro) {
    if (last_routing.count(window)) CHECK(last_routing[window] < idx);
    CHECK(last_micro[window] < first_accuracy[window]);
  }
  for (const auto& [window, idx] : first_regroup)
    CHECK(first_accuracy.at(window) < idx);
}

TEST_CASE("a scene shift splits the group and both sides keep training") {
  // Window 3 opens after the drift event at t=150: the shifted camera's eval
  // collapses while the centroid swings toward its new scene, so the
  // end-of-window check evicts the shifted camera; the centroid drag costs
  // the stationary camera enough to evict it too. The emptied job terminates
  // and both cameras re-seed fresh single-member jobs in the same pass.
  Simulation sim(load_scenario(scenario_path("drift_recovery.json")));
  sim.run();
  const MetricsTrace& trace = sim.trace();

  const auto removals = rows_of(trace, MetricsTrace::Kind::remove);
  REQUIRE(!removals.empty());
  CHECK(removals.front().window == 3);
  CHECK(removals.front().time_s == 240.0);
  bool removed_b = false;
  for (const auto& r : removals)
    if (r.camera == "cam_b") removed_b = true;
  CHECK(removed_b);

  const auto terminated = rows_of(trace, MetricsTrace::Kind::terminate);
  REQUIRE(!terminated.empty());
  CHECK(terminated.front().window == 3);
  CHECK(terminated.front().job == 0);

  // Every removal reroutes in the same window.
  std::multiset<CameraId> removed, rerouted;
  for (const auto& r : removals) removed.insert(r.camera);
  for (const auto& r : trace.rows) {
    if ((r.kind == MetricsTrace::Kind::new_job ||
         r.kind == MetricsTrace::Kind::join) &&
        r.time_s == (r.window + 1) * 60.0)
      rerouted.insert(r.camera);
  }
  CHECK(removed == rerouted);

  // Both cameras end the run served by their own trained models.
  const auto final_acc = final_accuracy(trace);
  CHECK(final_acc.at("cam_a") > 0.35);
  CHECK(final_acc.at("cam_b") > 0.35);

  const std::string summary = sim.summary_json();
  CHECK(summary.find("\"response_time_s\"") != std::string::npos);
  CHECK(summary.find("\"cam_b\"") != std::string::npos);
}

TEST_CASE("trace and summary are a pure function of the configuration") {
  const ScenarioConfig cfg = load_scenario(scenario_path("drift_recovery.json"));
  Simulation a(cfg);
  a.run();
  Simulation b(cfg);
  b.run();
  CHECK(trace_csv(a.trace()) == trace_csv(b.trace()));
  CHECK(a.summary_json() == b.summary_json());
}

TEST_CASE("shared training on shared scenes beats isolated training throughout") {
  // Same three cameras, same total resources; only the pairwise distances
  // differ. Co-located cameras pool into one job whose model sees the union
  // of their (identical) data; spread-out cameras train three copies.
  std::vector<CameraSpec> grouped_cams = {
      cam_spec("g1", 0, 0, {0.2, 0.2}, 0.1),
      cam_spec("g2", 50, 0, {0.2, 0.2}, 0.1),
      cam_spec("g3", 0, 50, {0.2, 0.2}, 0.1)};
  std::vector<CameraSpec> spread_cams = {
      cam_spec("g1", 0, 0, {0.2, 0.2}, 0.1),
      cam_spec("g2", 5000, 0, {0.2, 0.2}, 0.1),
      cam_spec("g3", 0, 5000, {0.2, 0.2}, 0.1)};

  Simulation grouped(make_scenario(4, grouped_cams));
  grouped.run();
  Simulation spread(make_scenario(4, spread_cams));
  spread.run();

  CHECK(grouped.jobs().size() == 1);
  CHECK(spread.jobs().size() == 3);

  const auto mean_grouped = mean_accuracy_per_window(grouped.trace());
  const auto mean_spread = mean_accuracy_per_window(spread.trace());
  REQUIRE(mean_grouped.size() == 4);
  REQUIRE(mean_spread.size() == 4);
  for (std::size_t w = 0; w < 4; ++w)
    CHECK(mean_grouped[w] >= mean_spread[w] - 1e-9);
}

TEST_CASE("grouping dissimilar scenes never manufactures accuracy") {
  std::vector<CameraSpec> grouped_cams = {
      cam_spec("a", 0, 0, {0.0, 0.0}, 0.1),
      cam_spec("b", 50, 0, {5.0, 0.0}, 0.1)};
  std::vector<CameraSpec> spread_cams = {
      cam_spec("a", 0, 0, {0.0, 0.0}, 0.1),
      cam_spec("b", 5000, 0, {5.0, 0.0}, 0.1)};

  Simulation grouped(make_scenario(4, grouped_cams));
  grouped.run();
  Simulation spread(make_scenario(4, spread_cams));
  spread.run();

  CHECK(grouped.jobs().size() == 1);  // the filter allows it; the scenes do not help
  CHECK(spread.jobs().size() == 2);

  double grouped_final = 0.0, spread_final = 0.0;
  for (const auto& [cam, acc] : final_accuracy(grouped.trace())) grouped_final += acc;
  for (const auto& [cam, acc] : final_accuracy(spread.trace())) spread_final += acc;
  CHECK(grouped_final / 2.0 <= spread_final / 2.0 + 0.02);
}

TEST_CASE("more jobs than micro-windows fails loudly") {
  ScenarioConfig cfg = make_scenario(1, {cam_spec("a", 0, 0, {0.0}, 0.1),
                                         cam_spec("b", 5000, 0, {0.0}, 0.1),
                                         cam_spec("c", 0, 5000, {0.0}, 0.1)});
  cfg.allocator.micro_windows = 2;
  Simulation sim(cfg);
  CHECK_THROWS_AS(sim.run(), InfeasibleScheduleError);
}

TEST_CASE("the naive policy splits the GPU uniformly at a fixed config") {
  ScenarioConfig cfg = make_scenario(2, {cam_spec("a", 0, 0, {0.0}, 0.1),
                                         cam_spec("b", 5000, 0, {0.0}, 0.1)},
                                     SchedulePolicy::naive);
  Simulation sim(cfg);
  sim.run();
  const auto marks = rows_of(sim.trace(), MetricsTrace::Kind::job_window);
  REQUIRE(!marks.empty());
  for (const auto& r : marks) CHECK(r.v2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("equal-bandwidth mode levels delivery across symmetric jobs") {
  ScenarioConfig cfg = make_scenario(2, {cam_spec("a", 0, 0, {0.0}, 0.1),
                                         cam_spec("b", 5000, 0, {0.0}, 0.1)});
  cfg.equal_bandwidth = true;
  Simulation sim(cfg);
  sim.run();
  const auto marks = rows_of(sim.trace(), MetricsTrace::Kind::job_window);
  REQUIRE(marks.size() >= 2);
  std::map<int, std::vector<double>> delivered;
  for (const auto& r : marks) delivered[r.window].push_back(r.v4);
  for (const auto& [window, rates] : delivered) {
    REQUIRE(rates.size() == 2);
    CHECK(rates[0] == doctest::Approx(rates[1]).epsilon(1e-9));
  }
}

TEST_CASE("camera profiles are built once and cached") {
  Simulation sim(make_scenario(1, {cam_spec("a", 0, 0, {0.0}, 0.1)}));
  const ProfileTable& first = sim.profile("a");
  const ProfileTable& second = sim.profile("a");
  CHECK(&first == &second);
  CHECK(first.rows.size() == 10);  // one level per micro-window count
  CHECK(first.rows.front().budget_gpu_s == 6.0);
  CHECK(first.rows.back().budget_gpu_s == 60.0);
  CHECK_THROWS_AS(sim.profile("ghost"), std::invalid_argument);
}

TEST_CASE("write_outputs persists the trace and summary") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / "ecco_test_outputs" / "run_a";
  fs::remove_all(dir.parent_path());

  Simulation sim(make_scenario(2, {cam_spec("a", 0, 0, {0.0}, 0.1)}));
  sim.run();
  write_outputs(sim, dir.string());

  REQUIRE(fs::exists(dir / "trace.csv"));
  REQUIRE(fs::exists(dir / "summary.json"));

  const MetricsTrace loaded = read_trace_csv_file((dir / "trace.csv").string());
  CHECK(loaded.rows.size() == sim.trace().rows.size());

  std::ifstream is(dir / "summary.json");
  std::ostringstream buffer;
  buffer << is.rdbuf();
  CHECK(buffer.str() == sim.summary_json());
  fs::remove_all(dir.parent_path());
}

TEST_CASE("run_scenario is a one-call wrapper over the simulation") {
  const ScenarioConfig cfg = make_scenario(1, {cam_spec("a", 0, 0, {0.0}, 0.1)});
  const MetricsTrace trace = run_scenario(cfg);
  Simulation sim(cfg);
  sim.run();
  CHECK(trace_csv(trace) == trace_csv(sim.trace()));
}
