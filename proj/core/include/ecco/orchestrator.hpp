#ifndef ECCO_ORCHESTRATOR_HPP_
#define ECCO_ORCHESTRATOR_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecco/gpu_allocator.hpp"
#include "ecco/grouping.hpp"
#include "ecco/job.hpp"
#include "ecco/metrics.hpp"
#include "ecco/netsim.hpp"
#include "ecco/scenario.hpp"
#include "ecco/transmission.hpp"
#include "ecco/types.hpp"

namespace ecco {

// Emits a retraining request when the device model's accuracy has fallen
// below the drift threshold. Callers suppress duplicates for cameras that are
// already grouped or already have a request pending.
std::optional<RetrainRequest> detect_drift(const CameraState& camera,
                                           double threshold, double now);

// Window-driven control loop tying the modules together. Each window:
//   1. apply due drift events and route pending requests into jobs
//   2. measurement pass over all jobs, GPU shares from the resulting gains
//   3. per-camera sampling configs and AIMD parameters from the shares
//   4. bandwidth simulation, then compression adaptation into per-job batches
//   5. the remaining micro-windows go to the scheduler's pick, training on
//      the freshly delivered batches
//   6. window-end accuracy samples, then the regrouping pass
class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg);

  // Runs the next window; false once all windows have run.
  bool step_window();
  void run();

  const ScenarioConfig& config() const { return cfg_; }
  const MetricsTrace& trace() const { return trace_; }
  const std::map<CameraId, CameraState>& cameras() const { return cameras_; }
  const JobMap& jobs() const { return jobs_; }
  int windows_run() const { return window_; }

  // Offline profile for one camera (built on first use, then cached).
  const ProfileTable& profile(const CameraId& id);

  std::string summary_json() const;

 private:
  void apply_due_events(double window_start);
  void emit_request(const RetrainRequest& request);
  void route_pending_requests(double window_start);
  double eval_job_on_scene(const RetrainJob& job, const SceneVector& scene) const;
  TrainingBatchStats bootstrap_batch(const RetrainJob& job) const;
  void refresh_membership();

  ScenarioConfig cfg_;
  std::map<CameraId, CameraState> cameras_;
  std::map<CameraId, ProfileTable> profiles_;
  JobMap jobs_;
  std::map<CameraId, JobId> membership_;
  std::map<JobId, TrainingBatchStats> batches_;
  std::vector<DriftEvent> events_;  // sorted by (time, camera)
  std::size_t next_event_ = 0;
  std::vector<RetrainRequest> pending_;
  JobId next_job_id_ = 0;
  int window_ = 0;
  MetricsTrace trace_;
};

MetricsTrace run_scenario(const ScenarioConfig& cfg);

// Writes trace.csv and summary.json under out_dir (created if needed).
void write_outputs(Simulation& sim, const std::string& out_dir);

}  // namespace ecco

#endif  // ECCO_ORCHESTRATOR_HPP_
