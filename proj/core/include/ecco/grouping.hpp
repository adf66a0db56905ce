#ifndef ECCO_GROUPING_HPP_
#define ECCO_GROUPING_HPP_

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ecco/job.hpp"
#include "ecco/types.hpp"

namespace ecco {

struct GroupingConfig {
  double epsilon_s = 120.0;       // max request-time skew within a group
  double delta_m = 500.0;         // max pairwise camera distance within a group
  double drop_threshold_p = 0.2;  // relative accuracy drop that evicts a member
};

using JobMap = std::map<JobId, RetrainJob>;

// Accuracy of a job's model on a scene snapshot.
using ModelEvalFn = std::function<double(const RetrainJob&, const SceneVector&)>;

// True iff the request is spatiotemporally correlated with every member:
// |member.t - request.t| <= epsilon and ||member.loc - request.loc|| <= delta.
bool correlation_filter(const RetrainJob& job, const RetrainRequest& request,
                        const GroupingConfig& cfg);

struct GroupAssignment {
  JobId job = -1;
  bool created = false;  // true when the request seeded a new job
  double acc = 0.0;      // model eval for joins, seed accuracy for new jobs
};

// Routes a request: among jobs passing the correlation filter whose model
// already serves the request at least as well as the device's own model
// (eval >= request.acc), joins the best-scoring one (ties -> lowest id);
// otherwise seeds a new single-member job whose model reproduces the
// device-reported accuracy. `exclude` suppresses one candidate, used when a
// request is reprocessed right after leaving a job.
GroupAssignment group_request(JobMap& jobs, RetrainRequest request,
                              const GroupingConfig& cfg, const ModelParams& params,
                              const ModelEvalFn& eval_fn, JobId& next_job_id,
                              std::optional<JobId> exclude = std::nullopt);

struct RegroupResult {
  struct Removal {
    CameraId camera;
    JobId from_job = -1;
    double relative_drop = 0.0;
    bool degenerate = false;  // previous accuracy was zero
  };
  std::vector<Removal> removals;
  std::vector<JobId> terminated;
  std::vector<std::pair<RetrainRequest, GroupAssignment>> reprocessed;
};

// End-of-window membership update. Scans jobs in ascending id order and
// members in ascending camera id order; any member whose accuracy fell by
// more than drop_threshold_p relative to the previous window (using the last
// two acc_history entries; members with shorter histories are skipped) is
// removed. Removed requests get refreshed metadata (t = now, current location
// and scene, accuracy = last in-group eval) and are rerouted through
// group_request within the same pass, never back into the job they just left.
// Jobs emptied by removals terminate before rerouting begins, so removed
// cameras may regroup with each other.
RegroupResult update_grouping(
    JobMap& jobs, const GroupingConfig& cfg, const ModelParams& params,
    const ModelEvalFn& eval_fn, JobId& next_job_id, double now,
    const std::function<Vec2(const CameraId&)>& locate,
    const std::function<SceneVector(const CameraId&)>& current_scene);

}  // namespace ecco

#endif  // ECCO_GROUPING_HPP_
