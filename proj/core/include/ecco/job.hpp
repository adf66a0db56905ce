#ifndef ECCO_JOB_HPP_
#define ECCO_JOB_HPP_

#include <map>
#include <vector>

#include "ecco/accuracy_model.hpp"
#include "ecco/types.hpp"

namespace ecco {

// A camera's standing request for retraining, carried as group-membership
// metadata once the camera joins a job.
struct RetrainRequest {
  CameraId camera;
  double t = 0.0;          // emission (or last refresh) time, seconds
  Vec2 loc;                // camera location at emission, meters
  SceneVector subsamples;  // scene snapshot of the camera's recent frames
  double acc = 0.0;        // device-reported accuracy on its own data
  std::vector<double> acc_history;  // per-window accuracy while grouped
};

// One group retraining job: a set of member requests sharing a model.
struct RetrainJob {
  JobId id = 0;
  std::vector<RetrainRequest> members;  // kept sorted by camera id
  ModelState model;
  std::map<CameraId, double> acc_per_member;  // last recorded eval per member
  std::vector<double> mean_acc_history;       // per-window mean over members

  int member_count() const { return static_cast<int>(members.size()); }
  const RetrainRequest* find_member(const CameraId& camera) const;
  void insert_member(RetrainRequest request);
  // Removes and returns the member; false if absent.
  bool extract_member(const CameraId& camera, RetrainRequest* out);
};

}  // namespace ecco

#endif  // ECCO_JOB_HPP_
