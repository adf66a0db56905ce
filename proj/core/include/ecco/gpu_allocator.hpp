#ifndef ECCO_GPU_ALLOCATOR_HPP_
#define ECCO_GPU_ALLOCATOR_HPP_

#include <map>
#include <utility>
#include <vector>

#include "ecco/types.hpp"

namespace ecco {

struct AllocatorConfig {
  double obj_alpha = 1.0;           // weight of the average-accuracy term
  double size_exponent_beta = 0.5;  // group-size exponent, <= 1
  int micro_windows = 10;           // micro-windows per retraining window (W)
  double micro_window_duration_s = 6.0;
  int gpu_count = 1;
  bool fairness_bonus = true;  // credit the minimum-accuracy job's gain twice

  double window_duration_s() const {
    return micro_windows * micro_window_duration_s;
  }
  void validate() const;  // throws std::invalid_argument
};

enum class SchedulePolicy { ecco, naive, total_acc_greedy };

// What the scheduler needs to know about a job. Decoupled from RetrainJob so
// tests can drive the allocator against scripted accuracy tables.
struct JobView {
  JobId id = 0;
  int member_count = 1;
};

// Training/evaluation environment the scheduler drives. The production
// backend wraps the accuracy model; tests substitute scripted gains.
class TrainingBackend {
 public:
  virtual ~TrainingBackend() = default;
  virtual double evaluate(JobId id) = 0;  // mean accuracy over the job's members
  virtual void train(JobId id, double gpu_seconds) = 0;
};

struct GpuAllocation {
  JobId job = 0;
  double c_gpu_s = 0.0;  // GPU-seconds granted for the coming window
  double p_share = 0.0;  // fraction of total GPU time, in [0,1]
};

struct MicroRecord {
  int micro_index = 0;
  JobId job = 0;
  double acc_before = 0.0;
  double acc_after = 0.0;
};

struct WindowSchedule {
  std::vector<MicroRecord> records;    // exactly W entries
  std::map<JobId, int> per_job_micro;  // micro-windows granted per job
};

// alpha * (sum n^beta * A / sum n^beta) + min A, over (member_count, accuracy)
// pairs. Throws std::invalid_argument on an empty list.
double objective_value(const std::vector<std::pair<int, double>>& jobs,
                       const AllocatorConfig& cfg);

// Marginal objective gain per job from the latest measured accuracy gains:
// ObjGain[j] = alpha * n_j^beta / sum_i n_i^beta * AccGain[j], plus (when the
// fairness bonus is enabled) AccGain of the minimum-accuracy job credited to
// that job again. Ties on the minimum resolve to the lowest job id. `acc` and
// `acc_gain` must cover every job.
std::map<JobId, double> cal_objective_gain(const std::vector<JobView>& jobs,
                                           const std::map<JobId, double>& acc,
                                           const std::map<JobId, double>& acc_gain,
                                           const AllocatorConfig& cfg);

// Converts post-measurement-pass objective gains into GPU shares for the
// window: negatives clamp to zero; all-zero degenerates to a uniform split
// (reported via `degenerate`). c_j = p_j * gpu_count * window_duration.
std::vector<GpuAllocation> estimate_shares(const std::map<JobId, double>& obj_gain,
                                           const AllocatorConfig& cfg,
                                           bool* degenerate = nullptr);

// Stepwise window allocation, split so a caller can interleave work between
// the measurement pass and the greedy remainder. The initial pass gives every
// job one micro-window in ascending id order and measures its accuracy gain;
// each remaining micro-window goes to the job with the current best selection
// score (objective gain for the primary policy, member_count * AccGain for
// total_acc_greedy, round-robin for naive). Ties resolve to the lowest id.
class WindowAllocation {
 public:
  WindowAllocation(std::vector<JobView> jobs, const AllocatorConfig& cfg,
                   SchedulePolicy policy, int window_index = 0);

  void run_initial_pass(TrainingBackend& backend);
  // Selection scores as of the completed initial pass (empty for naive).
  const std::map<JobId, double>& initial_scores() const { return initial_scores_; }
  void run_remaining(TrainingBackend& backend);

  bool initial_pass_done() const { return initial_done_; }
  const WindowSchedule& schedule() const { return schedule_; }

 private:
  void run_micro(JobId job, TrainingBackend& backend);
  std::map<JobId, double> current_scores() const;
  JobId pick_next() const;

  std::vector<JobView> jobs_;
  AllocatorConfig cfg_;
  SchedulePolicy policy_;
  int window_index_;
  std::map<JobId, double> acc_;
  std::map<JobId, double> gain_;
  std::map<JobId, double> initial_scores_;
  WindowSchedule schedule_;
  int budget_ = 0;
  int rr_cursor_ = 0;
  bool initial_done_ = false;
};

// Full window allocation under the primary policy: measurement pass over all
// jobs, then greedy best-objective-gain selection until W micro-windows are
// spent. Throws InfeasibleScheduleError when W < |jobs| or jobs is empty.
WindowSchedule allocate_window(const std::vector<JobView>& jobs,
                               const AllocatorConfig& cfg,
                               TrainingBackend& backend);

// Same procedure under a baseline selection rule: `naive` round-robins all W
// micro-windows across jobs; `total_acc_greedy` greedily maximizes
// member_count * AccGain with no fairness bonus and no size normalization.
WindowSchedule baseline_allocate(SchedulePolicy policy,
                                 const std::vector<JobView>& jobs,
                                 const AllocatorConfig& cfg,
                                 TrainingBackend& backend);

}  // namespace ecco

#endif  // ECCO_GPU_ALLOCATOR_HPP_
