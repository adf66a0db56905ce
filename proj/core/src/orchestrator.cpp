#include "ecco/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace ecco {

std::optional<RetrainRequest> detect_drift(const CameraState& camera,
                                           double threshold, double now) {
  if (camera.local_model_acc >= threshold) return std::nullopt;
  RetrainRequest request;
  request.camera = camera.id;
  request.t = now;
  request.loc = camera.location;
  request.subsamples = camera.scene;
  request.acc = camera.local_model_acc;
  return request;
}

namespace {

// Drives the scheduler against the live job table: evaluation averages the
// group model over its members, training consumes the job's current batch
// (or a bootstrap batch for jobs that have not received a delivery yet).
class JobTrainingBackend : public TrainingBackend {
 public:
  JobTrainingBackend(JobMap& jobs, const std::map<CameraId, CameraState>& cameras,
                     const std::map<JobId, TrainingBatchStats>& batches,
                     std::function<TrainingBatchStats(const RetrainJob&)> bootstrap,
                     const ModelParams& params)
      : jobs_(jobs),
        cameras_(cameras),
        batches_(batches),
        bootstrap_(std::move(bootstrap)),
        params_(params) {}

  double evaluate(JobId id) override {
    const RetrainJob& job = jobs_.at(id);
    if (job.members.empty()) return params_.acc_floor;
    double sum = 0.0;
    for (const auto& member : job.members)
      sum += eval(job.model, cameras_.at(member.camera), params_);
    return sum / job.member_count();
  }

  void train(JobId id, double gpu_seconds) override {
    RetrainJob& job = jobs_.at(id);
    const auto it = batches_.find(id);
    const TrainingBatchStats batch =
        it != batches_.end() ? it->second : bootstrap_(job);
    std::vector<CameraState> sources;
    sources.reserve(batch.source_mix.size());
    for (const auto& entry : batch.source_mix)
      sources.push_back(cameras_.at(entry.first));
    job.model = train_step(job.model, batch, gpu_seconds, sources, params_);
  }

 private:
  JobMap& jobs_;
  const std::map<CameraId, CameraState>& cameras_;
  const std::map<JobId, TrainingBatchStats>& batches_;
  std::function<TrainingBatchStats(const RetrainJob&)> bootstrap_;
  const ModelParams& params_;
};

}  // namespace

Simulation::Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& spec : cfg_.cameras) {
    CameraState cam;
    cam.id = spec.id;
    cam.location = spec.location;
    cam.scene = spec.scene;
    cam.local_model_acc = spec.local_model_acc;
    cam.local_uplink_cap_bps = spec.local_uplink_cap_bps;
    cam.gpu_pixel_throughput = spec.gpu_pixel_throughput;
    cameras_.emplace(cam.id, std::move(cam));
  }
  events_ = cfg_.drift_events;
  std::stable_sort(events_.begin(), events_.end(),
                   [](const DriftEvent& a, const DriftEvent& b) {
                     if (a.time_s != b.time_s) return a.time_s < b.time_s;
                     return a.camera < b.camera;
                   });
}

const ProfileTable& Simulation::profile(const CameraId& id) {
  const auto cached = profiles_.find(id);
  if (cached != profiles_.end()) return cached->second;
  const CameraSpec* spec = cfg_.find_camera(id);
  if (!spec) throw std::invalid_argument("unknown camera " + id);

  std::vector<double> levels;
  levels.reserve(cfg_.allocator.micro_windows);
  for (int k = 1; k <= cfg_.allocator.micro_windows; ++k)
    levels.push_back(k * cfg_.allocator.gpu_count *
                     cfg_.allocator.micro_window_duration_s);
  const auto grid = make_config_grid(cfg_.transmission.frame_rates,
                                     cfg_.transmission.resolution_ladder);
  ProfilerOptions opts;
  opts.window_duration_s = cfg_.window_length_s();
  opts.bias = spec->profile_bias;
  const CameraState& cam = cameras_.at(id);
  const ProbeFn probe =
      make_accuracy_probe(cam, cfg_.model, cfg_.transmission.probe_reference_rate_bps,
                          cfg_.transmission.bpp_ref);
  return profiles_.emplace(id, build_profile_table(cam, levels, grid, probe, opts))
      .first->second;
}

void Simulation::apply_due_events(double window_start) {
  while (next_event_ < events_.size() &&
         events_[next_event_].time_s <= window_start) {
    const DriftEvent& event = events_[next_event_++];
    CameraState& cam = cameras_.at(event.camera);
    cam = apply_drift(cam, event, cfg_.model);
    // Grouped cameras are already being served; their eviction, if the scene
    // change hurt the group model, happens through the end-of-window check.
    if (membership_.count(event.camera)) continue;
    const bool already_pending =
        std::any_of(pending_.begin(), pending_.end(), [&](const RetrainRequest& r) {
          return r.camera == event.camera;
        });
    if (already_pending) continue;
    if (auto request = detect_drift(cam, cfg_.drift_threshold, event.time_s))
      emit_request(*request);
  }
  // Cameras below the threshold without a fresh event (e.g. at startup).
  for (const auto& [id, cam] : cameras_) {
    if (membership_.count(id)) continue;
    const bool already_pending = std::any_of(
        pending_.begin(), pending_.end(),
        [&](const RetrainRequest& r) { return r.camera == id; });
    if (already_pending) continue;
    if (auto request = detect_drift(cam, cfg_.drift_threshold, window_start))
      emit_request(*request);
  }
}

void Simulation::emit_request(const RetrainRequest& request) {
  MetricsTrace::Row row;
  row.kind = MetricsTrace::Kind::request;
  row.window = window_;
  row.time_s = request.t;
  row.camera = request.camera;
  row.v1 = request.acc;
  trace_.rows.push_back(row);
  pending_.push_back(request);
}

void Simulation::route_pending_requests(double window_start) {
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const RetrainRequest& a, const RetrainRequest& b) {
                     if (a.t != b.t) return a.t < b.t;
                     return a.camera < b.camera;
                   });
  const ModelEvalFn eval_fn = [this](const RetrainJob& job, const SceneVector& scene) {
    return eval_job_on_scene(job, scene);
  };
  for (auto& request : pending_) {
    const CameraId camera = request.camera;
    const GroupAssignment assignment =
        group_request(jobs_, std::move(request), cfg_.grouping, cfg_.model, eval_fn,
                      next_job_id_);
    MetricsTrace::Row row;
    row.kind = assignment.created ? MetricsTrace::Kind::new_job
                                  : MetricsTrace::Kind::join;
    row.window = window_;
    row.time_s = window_start;
    row.camera = camera;
    row.job = assignment.job;
    row.v1 = assignment.acc;
    trace_.rows.push_back(row);
  }
  pending_.clear();
  refresh_membership();
}

double Simulation::eval_job_on_scene(const RetrainJob& job,
                                     const SceneVector& scene) const {
  CameraState probe;
  probe.scene = scene;
  return eval(job.model, probe, cfg_.model);
}

TrainingBatchStats Simulation::bootstrap_batch(const RetrainJob& job) const {
  TrainingBatchStats batch;
  batch.delivered_frame_rate = *std::min_element(cfg_.transmission.frame_rates.begin(),
                                                 cfg_.transmission.frame_rates.end());
  batch.resolution = *std::min_element(cfg_.transmission.resolution_ladder.begin(),
                                       cfg_.transmission.resolution_ladder.end());
  batch.quality_factor = 1.0;
  for (const auto& member : job.members)
    batch.source_mix[member.camera] = 1.0 / job.member_count();
  return batch;
}

void Simulation::refresh_membership() {
  membership_.clear();
  for (const auto& [id, job] : jobs_)
    for (const auto& member : job.members) membership_[member.camera] = id;
}

bool Simulation::step_window() {
  if (window_ >= cfg_.num_windows) return false;
  const double t0 = window_ * cfg_.window_length_s();
  const double t1 = t0 + cfg_.window_length_s();

  apply_due_events(t0);
  route_pending_requests(t0);

  struct JobWindowStats {
    int members = 0;
    double p = 0.0;
    double c = 0.0;
    double delivered_bps = 0.0;
    int micros = 0;
  };
  std::map<JobId, JobWindowStats> window_stats;

  if (!jobs_.empty()) {
    std::vector<JobView> views;
    views.reserve(jobs_.size());
    for (const auto& [id, job] : jobs_) views.push_back({id, job.member_count()});

    JobTrainingBackend backend(
        jobs_, cameras_, batches_,
        [this](const RetrainJob& job) { return bootstrap_batch(job); }, cfg_.model);

    WindowAllocation alloc(views, cfg_.allocator, cfg_.policy, window_);
    alloc.run_initial_pass(backend);

    std::map<JobId, double> scores;
    if (cfg_.policy == SchedulePolicy::naive) {
      for (const auto& view : views) scores[view.id] = 1.0;
    } else {
      scores = alloc.initial_scores();
    }
    const auto shares = estimate_shares(scores, cfg_.allocator);

    std::vector<FlowParams> flows;
    NetTopology topology;
    topology.shared_capacity_bps = cfg_.shared_capacity_bps;
    topology.rtt_s = cfg_.rtt_s;
    std::map<CameraId, SamplingConfig> selected;
    for (const auto& share : shares) {
      const RetrainJob& job = jobs_.at(share.job);
      auto& stats = window_stats[share.job];
      stats.members = job.member_count();
      stats.p = share.p_share;
      stats.c = share.c_gpu_s;
      for (const auto& member : job.members) {
        SamplingConfig config;
        if (cfg_.policy == SchedulePolicy::naive) {
          config = cfg_.transmission.fixed_config;
        } else {
          config = select_config(profile(member.camera), share.c_gpu_s,
                                 job.member_count())
                       .config;
        }
        selected[member.camera] = config;
        const CameraState& cam = cameras_.at(member.camera);
        if (cam.local_uplink_cap_bps > 0.0)
          topology.local_caps_bps[member.camera] = cam.local_uplink_cap_bps;
        flows.push_back(
            cfg_.equal_bandwidth
                ? FlowParams{member.camera, cfg_.transmission.alpha_unit_bps, 0.5}
                : set_aimd_params(member.camera, share.p_share, job.member_count(),
                                  cfg_.transmission.alpha_unit_bps));
      }
    }

    const FlowTrace net = simulate_window(flows, topology, cfg_.window_length_s());

    for (const auto& share : shares) {
      const RetrainJob& job = jobs_.at(share.job);
      double total_fps = 0.0;
      double resolution_sq = 0.0;
      double quality = 0.0;
      double delivered = 0.0;
      for (const auto& member : job.members) {
        const SamplingConfig& config = selected.at(member.camera);
        const double rate = net.mean_rate_bps.at(member.camera);
        const CompressionState comp =
            adapt_compression(rate, config, cfg_.transmission.bpp_ref);
        total_fps += config.frame_rate;
        resolution_sq += config.frame_rate * config.resolution * config.resolution;
        quality += config.frame_rate * comp.quality_factor;
        delivered += rate;
      }
      if (total_fps > 0.0) {
        TrainingBatchStats batch;
        batch.delivered_frame_rate = total_fps;
        batch.resolution = std::sqrt(resolution_sq / total_fps);
        batch.quality_factor = quality / total_fps;
        for (const auto& member : job.members)
          batch.source_mix[member.camera] =
              selected.at(member.camera).frame_rate / total_fps;
        batches_[share.job] = batch;
      }
      window_stats[share.job].delivered_bps = delivered;
    }

    alloc.run_remaining(backend);

    for (const auto& rec : alloc.schedule().records) {
      MetricsTrace::Row row;
      row.kind = MetricsTrace::Kind::micro;
      row.window = window_;
      row.time_s = t0 + (rec.micro_index + 1) * cfg_.allocator.micro_window_duration_s;
      row.job = rec.job;
      row.v1 = rec.micro_index;
      row.v2 = rec.acc_before;
      row.v3 = rec.acc_after;
      trace_.rows.push_back(row);
    }
    for (const auto& [job, micros] : alloc.schedule().per_job_micro)
      window_stats[job].micros = micros;
  }

  // Window-end accuracies. Grouped cameras run the group model, so the device
  // accuracy tracks the job's eval on the camera's current scene.
  for (auto& [id, job] : jobs_) {
    double sum = 0.0;
    for (auto& member : job.members) {
      const double acc = eval(job.model, cameras_.at(member.camera), cfg_.model);
      job.acc_per_member[member.camera] = acc;
      member.acc_history.push_back(acc);
      cameras_.at(member.camera).local_model_acc = acc;
      sum += acc;
    }
    if (!job.members.empty())
      job.mean_acc_history.push_back(sum / job.member_count());
  }
  for (const auto& [id, cam] : cameras_) {
    MetricsTrace::Row row;
    row.kind = MetricsTrace::Kind::accuracy;
    row.window = window_;
    row.time_s = t1;
    row.camera = id;
    const auto member_of = membership_.find(id);
    if (member_of != membership_.end()) row.job = member_of->second;
    row.v1 = cam.local_model_acc;
    trace_.rows.push_back(row);
  }

  if (!jobs_.empty()) {
    const RegroupResult regroup = update_grouping(
        jobs_, cfg_.grouping, cfg_.model,
        [this](const RetrainJob& job, const SceneVector& scene) {
          return eval_job_on_scene(job, scene);
        },
        next_job_id_, t1,
        [this](const CameraId& id) { return cameras_.at(id).location; },
        [this](const CameraId& id) { return cameras_.at(id).scene; });
    for (const auto& removal : regroup.removals) {
      MetricsTrace::Row row;
      row.kind = MetricsTrace::Kind::remove;
      row.window = window_;
      row.time_s = t1;
      row.camera = removal.camera;
      row.job = removal.from_job;
      row.v1 = removal.relative_drop;
      row.v2 = removal.degenerate ? 1.0 : 0.0;
      trace_.rows.push_back(row);
    }
    for (const JobId id : regroup.terminated) {
      batches_.erase(id);
      MetricsTrace::Row row;
      row.kind = MetricsTrace::Kind::terminate;
      row.window = window_;
      row.time_s = t1;
      row.job = id;
      trace_.rows.push_back(row);
    }
    for (const auto& [request, assignment] : regroup.reprocessed) {
      MetricsTrace::Row row;
      row.kind = assignment.created ? MetricsTrace::Kind::new_job
                                    : MetricsTrace::Kind::join;
      row.window = window_;
      row.time_s = t1;
      row.camera = request.camera;
      row.job = assignment.job;
      row.v1 = assignment.acc;
      trace_.rows.push_back(row);
    }
    refresh_membership();
  }

  for (const auto& [job, stats] : window_stats) {
    MetricsTrace::Row row;
    row.kind = MetricsTrace::Kind::job_window;
    row.window = window_;
    row.time_s = t1;
    row.job = job;
    row.v1 = stats.members;
    row.v2 = stats.p;
    row.v3 = stats.c;
    row.v4 = stats.delivered_bps;
    row.v5 = stats.micros;
    trace_.rows.push_back(row);
  }

  ++window_;
  return true;
}

void Simulation::run() {
  while (step_window()) {
  }
}

std::string Simulation::summary_json() const {
  nlohmann::json j;
  j["name"] = cfg_.name;
  j["policy"] = policy_name(cfg_.policy);
  j["seed"] = cfg_.seed;
  j["equal_bandwidth"] = cfg_.equal_bandwidth;
  j["num_windows"] = cfg_.num_windows;
  j["windows_run"] = window_;
  j["window_length_s"] = cfg_.window_length_s();

  nlohmann::json final_acc = nlohmann::json::object();
  for (const auto& [id, cam] : cameras_) final_acc[id] = cam.local_model_acc;
  j["final_accuracy"] = final_acc;
  j["mean_accuracy_per_window"] = mean_accuracy_per_window(trace_);

  nlohmann::json job_list = nlohmann::json::array();
  for (const auto& [id, job] : jobs_) {
    nlohmann::json entry;
    entry["id"] = id;
    nlohmann::json members = nlohmann::json::array();
    for (const auto& member : job.members) members.push_back(member.camera);
    entry["members"] = members;
    entry["mean_acc"] =
        job.mean_acc_history.empty() ? 0.0 : job.mean_acc_history.back();
    job_list.push_back(entry);
  }
  j["jobs"] = job_list;

  if (cfg_.response_target_acc) {
    nlohmann::json response = nlohmann::json::object();
    for (const auto& [camera, r] : response_time(trace_, *cfg_.response_target_acc)) {
      if (r.response_s)
        response[camera] = *r.response_s;
      else
        response[camera] = nullptr;
    }
    j["response_time_s"] = response;
  }
  return j.dump(2) + "\n";
}

MetricsTrace run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  sim.run();
  return sim.trace();
}

void write_outputs(Simulation& sim, const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "trace.csv");
    if (!os) throw std::runtime_error("cannot write trace.csv under " + out_dir);
    sim.trace().write_csv(os);
  }
  std::ofstream os(dir / "summary.json");
  if (!os) throw std::runtime_error("cannot write summary.json under " + out_dir);
  os << sim.summary_json();
}

}  // namespace ecco
