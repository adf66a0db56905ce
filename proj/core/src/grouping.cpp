#include "ecco/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecco {

bool correlation_filter(const RetrainJob& job, const RetrainRequest& request,
                        const GroupingConfig& cfg) {
  for (const auto& member : job.members) {
    if (std::abs(member.t - request.t) > cfg.epsilon_s) return false;
    if (distance(member.loc, request.loc) > cfg.delta_m) return false;
  }
  return true;
}

GroupAssignment group_request(JobMap& jobs, RetrainRequest request,
                              const GroupingConfig& cfg, const ModelParams& params,
                              const ModelEvalFn& eval_fn, JobId& next_job_id,
                              std::optional<JobId> exclude) {
  for (const auto& [id, job] : jobs) {
    if (job.find_member(request.camera))
      throw std::invalid_argument("group_request: camera " + request.camera +
                                  " is already a member of job " + std::to_string(id));
  }

  JobId best = -1;
  double best_acc = 0.0;
  for (const auto& [id, job] : jobs) {
    if (exclude && id == *exclude) continue;
    if (!correlation_filter(job, request, cfg)) continue;
    const double acc = eval_fn(job, request.subsamples);
    if (acc < request.acc) continue;  // group model must serve at least as well
    if (best < 0 || acc > best_acc) {
      best = id;
      best_acc = acc;
    }
  }

  GroupAssignment assignment;
  if (best >= 0) {
    RetrainJob& job = jobs.at(best);
    const CameraId camera = request.camera;
    request.acc_history.clear();
    job.insert_member(std::move(request));
    job.acc_per_member[camera] = best_acc;
    assignment = {best, false, best_acc};
  } else {
    RetrainJob job;
    job.id = next_job_id++;
    job.model = seed_model(request.subsamples, request.acc, params);
    const double seed_acc = request.acc;
    const CameraId camera = request.camera;
    request.acc_history.clear();
    job.insert_member(std::move(request));
    job.acc_per_member[camera] = seed_acc;
    assignment = {job.id, true, seed_acc};
    jobs.emplace(job.id, std::move(job));
  }
  return assignment;
}

RegroupResult update_grouping(
    JobMap& jobs, const GroupingConfig& cfg, const ModelParams& params,
    const ModelEvalFn& eval_fn, JobId& next_job_id, double now,
    const std::function<Vec2(const CameraId&)>& locate,
    const std::function<SceneVector(const CameraId&)>& current_scene) {
  if (!(cfg.drop_threshold_p > 0.0))
    throw std::invalid_argument("update_grouping: drop_threshold_p must be positive");

  RegroupResult result;
  for (const auto& [id, job] : jobs) {
    for (const auto& member : job.members) {
      const auto& history = member.acc_history;
      if (history.size() < 2) continue;  // joined too recently to compare
      const double prev = history[history.size() - 2];
      const double cur = history.back();
      if (prev <= 0.0) {
        result.removals.push_back({member.camera, id, 0.0, true});
        continue;
      }
      const double drop = (cur - prev) / prev;
      if (drop < -cfg.drop_threshold_p)
        result.removals.push_back({member.camera, id, drop, false});
    }
  }

  std::vector<RetrainRequest> evicted;
  evicted.reserve(result.removals.size());
  for (const auto& removal : result.removals) {
    RetrainRequest request;
    jobs.at(removal.from_job).extract_member(removal.camera, &request);
    const double last_acc = request.acc_history.empty() ? request.acc
                                                        : request.acc_history.back();
    request.t = now;
    if (locate) request.loc = locate(request.camera);
    if (current_scene) request.subsamples = current_scene(request.camera);
    request.acc = std::max(0.0, last_acc);
    request.acc_history.clear();
    evicted.push_back(std::move(request));
  }

  for (auto it = jobs.begin(); it != jobs.end();) {
    if (it->second.members.empty()) {
      result.terminated.push_back(it->first);
      it = jobs.erase(it);
    } else {
      ++it;
    }
  }

  for (std::size_t i = 0; i < evicted.size(); ++i) {
    const JobId left = result.removals[i].from_job;
    const CameraId camera = evicted[i].camera;
    GroupAssignment assignment = group_request(jobs, std::move(evicted[i]), cfg, params,
                                               eval_fn, next_job_id, left);
    result.reprocessed.emplace_back(*jobs.at(assignment.job).find_member(camera), assignment);
  }
  return result;
}

}  // namespace ecco
