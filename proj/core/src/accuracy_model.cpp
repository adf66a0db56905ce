#include "ecco/accuracy_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ecco {
namespace {

double euclidean(const SceneVector& a, const SceneVector& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

double mean_pixel_throughput(const std::vector<CameraState>& cameras) {
  if (cameras.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& cam : cameras) sum += cam.gpu_pixel_throughput;
  return sum / static_cast<double>(cameras.size());
}

}  // namespace

double similarity(const SceneVector& a, const SceneVector& b, double lambda) {
  if (a.size() != b.size())
    throw std::invalid_argument("similarity: scene dimension mismatch");
  if (!(lambda > 0.0))
    throw std::invalid_argument("similarity: lambda must be positive");
  return std::exp(-euclidean(a, b) / lambda);
}

int find_cluster(const ModelState& model, const SceneVector& scene,
                 const ModelParams& params) {
  int best = -1;
  double best_sim = 0.0;
  for (std::size_t c = 0; c < model.clusters.size(); ++c) {
    const double s = similarity(model.clusters[c], scene, params.similarity_lambda);
    if (s > best_sim) {
      best_sim = s;
      best = static_cast<int>(c);
    }
  }
  if (best >= 0 && best_sim >= params.cluster_similarity_threshold) return best;
  return -1;
}

int find_or_add_cluster(ModelState& model, const SceneVector& scene,
                        const ModelParams& params) {
  const int found = find_cluster(model, scene, params);
  if (found >= 0) return found;
  model.clusters.push_back(scene);
  model.proficiency.push_back(0.0);
  return static_cast<int>(model.clusters.size()) - 1;
}

double eval(const ModelState& model, const CameraState& camera,
            const ModelParams& params) {
  if (model.clusters.empty() || model.centroid.empty()) return params.acc_floor;
  const int cluster = find_cluster(model, camera.scene, params);
  const double prof = cluster < 0 ? 0.0 : model.proficiency[cluster];
  const double sim = similarity(camera.scene, model.centroid, params.similarity_lambda);
  return params.acc_floor + (params.acc_ceil - params.acc_floor) * prof * sim;
}

ModelState train_step(const ModelState& model, const TrainingBatchStats& batch,
                      double gpu_time_s, const std::vector<CameraState>& cameras,
                      const ModelParams& params) {
  if (gpu_time_s < 0.0)
    throw std::invalid_argument("train_step: negative gpu_time");
  double mix_total = 0.0;
  for (const auto& [id, frac] : batch.source_mix) {
    if (frac < 0.0) throw std::invalid_argument("train_step: negative source_mix fraction");
    mix_total += frac;
  }
  if (!batch.source_mix.empty() && std::abs(mix_total - 1.0) > 1e-9)
    throw std::invalid_argument("train_step: source_mix fractions must sum to 1");

  const double supplied = batch.delivered_frame_rate * pixels_per_frame(batch.resolution);
  const double required = mean_pixel_throughput(cameras);
  const double sufficiency = required > 0.0 ? std::min(1.0, supplied / required) : 1.0;
  const double effort = gpu_time_s * sufficiency * batch.quality_factor;
  if (effort <= 0.0) return model;

  ModelState next = model;
  std::map<int, double> cluster_weight;
  SceneVector centroid;
  for (const auto& [id, frac] : batch.source_mix) {
    const auto cam = std::find_if(cameras.begin(), cameras.end(),
                                  [&](const CameraState& c) { return c.id == id; });
    if (cam == cameras.end())
      throw std::invalid_argument("train_step: source_mix camera missing: " + id);
    const int cluster = find_or_add_cluster(next, cam->scene, params);
    cluster_weight[cluster] += frac;
    if (centroid.empty()) centroid.assign(cam->scene.size(), 0.0);
    if (centroid.size() != cam->scene.size())
      throw std::invalid_argument("train_step: scene dimension mismatch in batch");
    for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += frac * cam->scene[i];
  }
  for (const auto& [cluster, weight] : cluster_weight) {
    if (weight <= 0.0) continue;
    const double p = next.proficiency[cluster];
    next.proficiency[cluster] =
        1.0 - (1.0 - p) * std::exp(-params.learning_rate_k * effort * weight);
  }
  if (!centroid.empty()) next.centroid = std::move(centroid);
  return next;
}

CameraState apply_drift(const CameraState& camera, const DriftEvent& event,
                        const ModelParams& params) {
  if (event.camera != camera.id)
    throw std::invalid_argument("apply_drift: event targets camera " + event.camera +
                                ", not " + camera.id);
  CameraState next = camera;
  next.scene = event.new_scene;
  next.local_model_acc = std::max(params.acc_floor, camera.local_model_acc - event.acc_drop);
  return next;
}

ModelState seed_model(const SceneVector& scene, double device_acc,
                      const ModelParams& params) {
  const double span = params.acc_ceil - params.acc_floor;
  const double prof =
      span > 0.0 ? std::clamp((device_acc - params.acc_floor) / span, 0.0, 1.0) : 0.0;
  ModelState model;
  model.clusters.push_back(scene);
  model.proficiency.push_back(prof);
  model.centroid = scene;
  return model;
}

}  // namespace ecco
