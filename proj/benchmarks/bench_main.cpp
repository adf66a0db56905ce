#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "ecco/gpu_allocator.hpp"
#include "ecco/netsim.hpp"
#include "ecco/orchestrator.hpp"
#include "ecco/scenario.hpp"

namespace {

void bm_aimd_window(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<ecco::FlowParams> flows;
  for (int i = 0; i < n; ++i)
    flows.push_back({"f" + std::to_string(i), 5e4 + 1e4 * i, 0.5});
  ecco::NetTopology topology;
  topology.shared_capacity_bps = 9e6;
  topology.rtt_s = 0.05;
  for (auto _ : state) {
    auto trace = ecco::simulate_window(flows, topology, 60.0);
    benchmark::DoNotOptimize(trace.mean_rate_bps);
  }
}
BENCHMARK(bm_aimd_window)->Arg(2)->Arg(6)->Arg(22);

class ConstGainBackend : public ecco::TrainingBackend {
 public:
  double evaluate(ecco::JobId id) override { return acc_[id]; }
  void train(ecco::JobId id, double) override {
    acc_[id] = std::min(1.0, acc_[id] + 0.01 + 0.001 * id);
  }

 private:
  std::map<ecco::JobId, double> acc_;
};

void bm_allocate_window(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  std::vector<ecco::JobView> views;
  for (int j = 0; j < jobs; ++j) views.push_back({j, 1 + j % 4});
  ecco::AllocatorConfig cfg;
  cfg.micro_windows = 2 * jobs;
  for (auto _ : state) {
    ConstGainBackend backend;
    auto schedule = ecco::allocate_window(views, cfg, backend);
    benchmark::DoNotOptimize(schedule.records.size());
  }
}
BENCHMARK(bm_allocate_window)->Arg(2)->Arg(8)->Arg(16);

ecco::ScenarioConfig small_scenario() {
  ecco::ScenarioConfig cfg;
  cfg.name = "bench";
  cfg.num_windows = 4;
  cfg.model.learning_rate_k = 0.02;
  for (int i = 0; i < 4; ++i) {
    ecco::CameraSpec cam;
    cam.id = "cam" + std::to_string(i);
    cam.location = {20.0 * i, 0.0};
    cam.scene = {0.0, 0.0};
    cam.local_model_acc = 0.1;
    cfg.cameras.push_back(cam);
  }
  return cfg;
}

void bm_run_scenario(benchmark::State& state) {
  const ecco::ScenarioConfig cfg = small_scenario();
  for (auto _ : state) {
    auto trace = ecco::run_scenario(cfg);
    benchmark::DoNotOptimize(trace.rows.size());
  }
}
BENCHMARK(bm_run_scenario);

}  // namespace

BENCHMARK_MAIN();
