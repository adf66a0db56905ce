#include "ecco/job.hpp"

#include <algorithm>

namespace ecco {

const RetrainRequest* RetrainJob::find_member(const CameraId& camera) const {
  for (const auto& m : members)
    if (m.camera == camera) return &m;
  return nullptr;
}

void RetrainJob::insert_member(RetrainRequest request) {
  const auto pos = std::lower_bound(
      members.begin(), members.end(), request,
      [](const RetrainRequest& a, const RetrainRequest& b) { return a.camera < b.camera; });
  members.insert(pos, std::move(request));
}

bool RetrainJob::extract_member(const CameraId& camera, RetrainRequest* out) {
  for (auto it = members.begin(); it != members.end(); ++it) {
    if (it->camera == camera) {
      if (out) *out = std::move(*it);
      members.erase(it);
      acc_per_member.erase(camera);
      return true;
    }
  }
  return false;
}

}  // namespace ecco
