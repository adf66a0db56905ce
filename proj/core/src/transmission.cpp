#include "ecco/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ecco/metrics.hpp"

namespace ecco {
namespace {

// Tie preference: bias dimension first, secondary dimension second.
bool preferred(const SamplingConfig& candidate, const SamplingConfig& incumbent,
               ProfileBias bias) {
  if (bias == ProfileBias::resolution) {
    if (candidate.resolution != incumbent.resolution)
      return candidate.resolution > incumbent.resolution;
    return candidate.frame_rate > incumbent.frame_rate;
  }
  if (candidate.frame_rate != incumbent.frame_rate)
    return candidate.frame_rate > incumbent.frame_rate;
  return candidate.resolution > incumbent.resolution;
}

SamplingConfig cheapest(const std::vector<SamplingConfig>& grid) {
  SamplingConfig best = grid.front();
  for (const auto& c : grid) {
    if (c.pixel_rate() < best.pixel_rate() ||
        (c.pixel_rate() == best.pixel_rate() &&
         (c.resolution < best.resolution ||
          (c.resolution == best.resolution && c.frame_rate < best.frame_rate))))
      best = c;
  }
  return best;
}

}  // namespace

std::vector<SamplingConfig> make_config_grid(const std::vector<double>& frame_rates,
                                             const std::vector<double>& resolutions) {
  std::vector<SamplingConfig> grid;
  grid.reserve(frame_rates.size() * resolutions.size());
  for (const double f : frame_rates)
    for (const double q : resolutions) grid.push_back({f, q});
  return grid;
}

ProfileTable build_profile_table(const CameraState& camera,
                                 const std::vector<double>& budget_levels,
                                 const std::vector<SamplingConfig>& grid,
                                 const ProbeFn& probe, const ProfilerOptions& opts) {
  if (grid.empty())
    throw std::invalid_argument("build_profile_table: empty config grid");
  if (budget_levels.empty())
    throw std::invalid_argument("build_profile_table: no budget levels");
  if (!(opts.window_duration_s > 0.0))
    throw std::invalid_argument("build_profile_table: window duration must be positive");

  std::vector<double> levels = budget_levels;
  std::sort(levels.begin(), levels.end());

  ProfileTable table;
  table.camera = camera.id;
  for (const double budget : levels) {
    if (!(budget > 0.0))
      throw std::invalid_argument("build_profile_table: budget levels must be positive");
    const double pixel_budget =
        camera.gpu_pixel_throughput * budget / opts.window_duration_s;

    bool found = false;
    double best_acc = 0.0;
    std::vector<double> accs(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i].pixel_rate() > pixel_budget) continue;
      accs[i] = probe(grid[i], budget);
      if (!found || accs[i] > best_acc) best_acc = accs[i];
      found = true;
    }
    if (!found) {
      table.rows.push_back({budget, cheapest(grid), false});
      continue;
    }
    bool have_pick = false;
    SamplingConfig pick{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i].pixel_rate() > pixel_budget) continue;
      if (accs[i] < best_acc - opts.tie_epsilon) continue;
      if (!have_pick || preferred(grid[i], pick, opts.bias)) {
        pick = grid[i];
        have_pick = true;
      }
    }
    table.rows.push_back({budget, pick, true});
  }
  return table;
}

ProbeFn make_accuracy_probe(const CameraState& camera, const ModelParams& params,
                            double reference_rate_bps, double bpp_ref) {
  if (!(reference_rate_bps > 0.0))
    throw std::invalid_argument("make_accuracy_probe: reference rate must be positive");
  return [camera, params, reference_rate_bps, bpp_ref](const SamplingConfig& config,
                                                       double budget_gpu_s) {
    ModelState model = seed_model(camera.scene, params.acc_floor, params);
    TrainingBatchStats batch;
    batch.delivered_frame_rate = config.frame_rate;
    batch.resolution = config.resolution;
    batch.quality_factor =
        adapt_compression(reference_rate_bps, config, bpp_ref).quality_factor;
    batch.source_mix[camera.id] = 1.0;
    model = train_step(model, batch, budget_gpu_s, {camera}, params);
    return eval(model, camera, params);
  };
}

SelectedConfig select_config(const ProfileTable& table, double c_gpu_s, int n_members) {
  if (table.rows.empty())
    throw std::invalid_argument("select_config: empty profile table");
  if (n_members < 1)
    throw std::invalid_argument("select_config: n_members must be >= 1");

  const ProfileRow* row = nullptr;
  for (const auto& r : table.rows) {
    if (r.budget_gpu_s <= c_gpu_s * (1.0 + 1e-12) + 1e-12) row = &r;
  }
  SelectedConfig selected;
  if (!row) {
    row = &table.rows.front();
    selected.below_range = true;
  }
  selected.budget_level_gpu_s = row->budget_gpu_s;
  selected.config = {row->config.frame_rate / n_members, row->config.resolution};
  return selected;
}

FlowParams set_aimd_params(const std::string& flow_id, double p_share, int n_members,
                           double alpha_unit_bps) {
  if (!(p_share > 0.0) || p_share > 1.0 + 1e-9)
    throw std::invalid_argument("set_aimd_params: p_share must be in (0,1]");
  if (n_members < 1)
    throw std::invalid_argument("set_aimd_params: n_members must be >= 1");
  if (!(alpha_unit_bps > 0.0))
    throw std::invalid_argument("set_aimd_params: alpha_unit must be positive");
  return {flow_id, p_share / n_members * alpha_unit_bps, 0.5};
}

CompressionState adapt_compression(double achieved_rate_bps,
                                   const SamplingConfig& config, double bpp_ref) {
  if (achieved_rate_bps < 0.0)
    throw std::invalid_argument("adapt_compression: negative rate");
  if (!(bpp_ref > 0.0))
    throw std::invalid_argument("adapt_compression: bpp_ref must be positive");
  CompressionState state;
  state.target_rate_bps = achieved_rate_bps;
  if (achieved_rate_bps == 0.0) return state;  // quality collapses to zero
  const double pixel_rate = config.pixel_rate();
  if (!(pixel_rate > 0.0))
    throw std::invalid_argument("adapt_compression: config has zero pixel rate");
  state.bits_per_pixel = achieved_rate_bps / pixel_rate;
  state.quality_factor = std::min(1.0, state.bits_per_pixel / bpp_ref);
  return state;
}

void save_profile_table(const ProfileTable& table, std::ostream& os) {
  os << "# camera=" << table.camera << '\n';
  os << "budget_gpu_s,fps,resolution,feasible\n";
  for (const auto& row : table.rows)
    os << format_value(row.budget_gpu_s) << ',' << format_value(row.config.frame_rate)
       << ',' << format_value(row.config.resolution) << ',' << (row.feasible ? 1 : 0)
       << '\n';
}

ProfileTable load_profile_table(std::istream& is) {
  ProfileTable table;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("# camera=", 0) == 0) {
      table.camera = line.substr(9);
      continue;
    }
    if (!header_seen) {
      if (line != "budget_gpu_s,fps,resolution,feasible")
        throw SchemaError("profile:line " + std::to_string(line_no),
                          "unexpected header: " + line);
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string field;
    ProfileRow row;
    try {
      std::getline(ss, field, ',');
      row.budget_gpu_s = std::stod(field);
      std::getline(ss, field, ',');
      row.config.frame_rate = std::stod(field);
      std::getline(ss, field, ',');
      row.config.resolution = std::stod(field);
      std::getline(ss, field, ',');
      row.feasible = std::stoi(field) != 0;
    } catch (const std::exception&) {
      throw SchemaError("profile:line " + std::to_string(line_no),
                        "malformed row: " + line);
    }
    table.rows.push_back(row);
  }
  if (!header_seen)
    throw SchemaError("profile", "missing header row");
  return table;
}

void save_profile_table_file(const ProfileTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  save_profile_table(table, os);
}

ProfileTable load_profile_table_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load_profile_table(is);
}

}  // namespace ecco
