#ifndef ECCO_TRANSMISSION_HPP_
#define ECCO_TRANSMISSION_HPP_

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecco/accuracy_model.hpp"
#include "ecco/netsim.hpp"
#include "ecco/types.hpp"

namespace ecco {

struct SamplingConfig {
  double frame_rate = 0.0;  // fps
  double resolution = 0.0;  // vertical pixels, 16:9 aspect

  double pixel_rate() const { return frame_rate * pixels_per_frame(resolution); }
};

struct ProfileRow {
  double budget_gpu_s = 0.0;  // GPU-seconds per retraining window
  SamplingConfig config;
  bool feasible = true;  // false when no grid config fit the pixel budget
};

// Offline profiling result for one camera: the best sampling configuration at
// each GPU budget level, rows in ascending budget order.
struct ProfileTable {
  CameraId camera;
  std::vector<ProfileRow> rows;
};

// Tie-break preference among equally scoring configurations: static cameras
// favor resolution, mobile cameras favor frame rate.
enum class ProfileBias { resolution, frame_rate };

struct ProfilerOptions {
  double window_duration_s = 60.0;
  ProfileBias bias = ProfileBias::resolution;
  double tie_epsilon = 1e-9;  // accuracy margin treated as a tie
};

// Probe: retraining accuracy reached with a sampling config under a budget.
using ProbeFn = std::function<double(const SamplingConfig&, double budget_gpu_s)>;

std::vector<SamplingConfig> make_config_grid(const std::vector<double>& frame_rates,
                                             const std::vector<double>& resolutions);

// For each budget level, probes every grid config whose pixel rate fits the
// GPU pixel throughput implied by the budget (rate * budget / window) and
// records the argmax. Ties resolve by the bias, then the secondary dimension.
// Levels where nothing fits record the cheapest grid config, flagged
// infeasible. Budgets must be positive; the grid must be non-empty.
ProfileTable build_profile_table(const CameraState& camera,
                                 const std::vector<double>& budget_levels,
                                 const std::vector<SamplingConfig>& grid,
                                 const ProbeFn& probe, const ProfilerOptions& opts);

// Production probe: a short simulated retraining of a fresh model on this
// camera at a fixed reference bitrate, so that configs are compared on their
// training value alone.
ProbeFn make_accuracy_probe(const CameraState& camera, const ModelParams& params,
                            double reference_rate_bps, double bpp_ref);

struct SelectedConfig {
  SamplingConfig config;
  double budget_level_gpu_s = 0.0;  // the row the selection came from
  bool below_range = false;         // c_gpu_s was below the smallest level
};

// Nearest profiled budget level not exceeding c_gpu_s; the configured frame
// rate is split evenly across the job's n_members cameras (f* / n, same
// resolution). Budgets below the smallest level use it and set below_range.
SelectedConfig select_config(const ProfileTable& table, double c_gpu_s,
                             int n_members);

// GAIMD parameters broadcasting a job's GPU share into bandwidth competition:
// beta = 0.5 and alpha = (p_share / n_members) * alpha_unit, which makes a
// job's aggregate steady-state bandwidth proportional to its GPU share.
FlowParams set_aimd_params(const std::string& flow_id, double p_share,
                           int n_members, double alpha_unit_bps);

struct CompressionState {
  double target_rate_bps = 0.0;
  double bits_per_pixel = 0.0;
  double quality_factor = 0.0;  // min(1, bits_per_pixel / bpp_ref)
};

// Collapses an achieved bitrate onto compression quality while keeping the
// selected frame rate and resolution fixed.
CompressionState adapt_compression(double achieved_rate_bps,
                                   const SamplingConfig& config, double bpp_ref);

// One row per budget level: budget_gpu_s,fps,resolution,feasible.
void save_profile_table(const ProfileTable& table, std::ostream& os);
ProfileTable load_profile_table(std::istream& is);
void save_profile_table_file(const ProfileTable& table, const std::string& path);
ProfileTable load_profile_table_file(const std::string& path);

}  // namespace ecco

#endif  // ECCO_TRANSMISSION_HPP_
