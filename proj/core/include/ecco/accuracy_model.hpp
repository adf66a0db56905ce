#ifndef ECCO_ACCURACY_MODEL_HPP_
#define ECCO_ACCURACY_MODEL_HPP_

#include <map>
#include <vector>

#include "ecco/types.hpp"

namespace ecco {

// Parameters of the parametric accuracy response that stands in for real DNN
// retraining. A model's accuracy on a camera is
//
//   acc = acc_floor + (acc_ceil - acc_floor) * proficiency(cluster(scene))
//                                            * similarity(scene, centroid)
//
// where proficiency accumulates with training effort (saturating exponential)
// and similarity decays with scene distance, exp(-||a-b|| / lambda).
struct ModelParams {
  double learning_rate_k = 0.05;   // proficiency gain per effective GPU-second
  double similarity_lambda = 0.5;  // length scale of scene similarity
  double acc_floor = 0.1;          // accuracy of an untrained model
  double acc_ceil = 0.6;           // accuracy of a fully trained, matched model
  double cluster_similarity_threshold = 0.9;  // scenes this similar share a cluster
};

struct CameraState {
  CameraId id;
  Vec2 location;                      // meters
  SceneVector scene;                  // current scene descriptor
  double local_model_acc = 0.0;       // accuracy of the model on the device
  double local_uplink_cap_bps = 0.0;  // 0 = uncapped
  double gpu_pixel_throughput = 0.0;  // pixels/s one GPU consumes while training
};

struct ModelState {
  std::vector<SceneVector> clusters;  // scene-cluster centroids, id = index
  std::vector<double> proficiency;    // per cluster, in [0,1]
  SceneVector centroid;               // training-data mix centroid
};

struct DriftEvent {
  CameraId camera;
  double time_s = 0.0;
  SceneVector new_scene;
  double acc_drop = 0.0;  // drop of the device model's accuracy, in [0,1]
};

// Description of one retraining window's worth of delivered training data for
// a job, aggregated over the job's member cameras.
struct TrainingBatchStats {
  double delivered_frame_rate = 0.0;      // fps, summed over contributors
  double resolution = 0.0;                // effective vertical resolution
  double quality_factor = 1.0;            // compression quality, (0,1]
  std::map<CameraId, double> source_mix;  // fraction of the batch per camera
};

double similarity(const SceneVector& a, const SceneVector& b, double lambda);

// Index of the cluster whose centroid is most similar to `scene`, if that
// similarity clears params.cluster_similarity_threshold; -1 otherwise.
// Ties resolve to the lowest cluster id.
int find_cluster(const ModelState& model, const SceneVector& scene,
                 const ModelParams& params);

// Same lookup, but registers a new cluster (proficiency 0) on a miss.
int find_or_add_cluster(ModelState& model, const SceneVector& scene,
                        const ModelParams& params);

// Accuracy of `model` on `camera`'s current scene. A model with no clusters
// or an unseen scene scores acc_floor.
double eval(const ModelState& model, const CameraState& camera,
            const ModelParams& params);

// One training step. Effective effort is
//   e = gpu_time * min(1, supplied_pixel_rate / gpu_pixel_throughput) * quality
// and each cluster touched by the batch advances
//   proficiency' = 1 - (1 - proficiency) * exp(-k * e * weight)
// with weight = the batch fraction contributed by cameras in that cluster.
// The centroid moves to the source_mix-weighted mean of contributor scenes.
// Zero effort returns the model unchanged. `cameras` are the batch sources.
ModelState train_step(const ModelState& model, const TrainingBatchStats& batch,
                      double gpu_time_s, const std::vector<CameraState>& cameras,
                      const ModelParams& params);

// Applies a scene change to the camera and degrades its device model:
// acc <- max(acc_floor, acc - acc_drop).
CameraState apply_drift(const CameraState& camera, const DriftEvent& event,
                        const ModelParams& params);

// Fresh single-cluster model seeded so that eval on `scene` reproduces the
// accuracy the device reported for its current model.
ModelState seed_model(const SceneVector& scene, double device_acc,
                      const ModelParams& params);

}  // namespace ecco

#endif  // ECCO_ACCURACY_MODEL_HPP_
