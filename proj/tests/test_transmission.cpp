#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "ecco/transmission.hpp"
#include "ecco/types.hpp"

using namespace ecco;

namespace {

CameraState make_camera(double throughput = 8.192e6) {
  CameraState cam;
  cam.id = "cam";
  cam.scene = {0.0, 0.0};
  cam.gpu_pixel_throughput = throughput;
  return cam;
}

std::vector<double> default_ladder() { return {360, 480, 720, 960}; }
std::vector<double> default_fps() { return {1, 2, 5, 10, 15}; }

// Independent re-statement of the profiling rule: among grid configs whose
// pixel rate fits the budget's pixel throughput, take the probe argmax;
// resolve ties (within tie_epsilon) by the bias dimension, then the other
// dimension. Empty feasible sets fall back to the cheapest config, flagged.
ProfileTable brute_force_table(const CameraState& cam,
                               std::vector<double> levels,
                               const std::vector<SamplingConfig>& grid,
                               const ProbeFn& probe,
                               const ProfilerOptions& opts) {
  std::sort(levels.begin(), levels.end());
  ProfileTable table;
  table.camera = cam.id;
  for (const double budget : levels) {
    const double pixel_budget =
        cam.gpu_pixel_throughput * budget / opts.window_duration_s;
    std::vector<std::pair<SamplingConfig, double>> feasible;
    for (const auto& cfg : grid)
      if (cfg.pixel_rate() <= pixel_budget)
        feasible.push_back({cfg, probe(cfg, budget)});

    if (feasible.empty()) {
      SamplingConfig cheapest = grid.front();
      for (const auto& cfg : grid) {
        if (cfg.pixel_rate() < cheapest.pixel_rate() ||
            (cfg.pixel_rate() == cheapest.pixel_rate() &&
             (cfg.resolution < cheapest.resolution ||
              (cfg.resolution == cheapest.resolution &&
               cfg.frame_rate < cheapest.frame_rate))))
          cheapest = cfg;
      }
      table.rows.push_back({budget, cheapest, false});
      continue;
    }

    double best = feasible.front().second;
    for (const auto& [cfg, acc] : feasible) best = std::max(best, acc);
    SamplingConfig pick;
    bool have = false;
    for (const auto& [cfg, acc] : feasible) {
      if (acc < best - opts.tie_epsilon) continue;
      const bool wins = [&] {
        if (!have) return true;
        if (opts.bias == ProfileBias::resolution) {
          if (cfg.resolution != pick.resolution)
            return cfg.resolution > pick.resolution;
          return cfg.frame_rate > pick.frame_rate;
        }
        if (cfg.frame_rate != pick.frame_rate)
          return cfg.frame_rate > pick.frame_rate;
        return cfg.resolution > pick.resolution;
      }();
      if (wins) {
        pick = cfg;
        have = true;
      }
    }
    table.rows.push_back({budget, pick, true});
  }
  return table;
}

void check_tables_equal(const ProfileTable& a, const ProfileTable& b) {
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].budget_gpu_s == b.rows[i].budget_gpu_s);
    CHECK(a.rows[i].config.frame_rate == b.rows[i].config.frame_rate);
    CHECK(a.rows[i].config.resolution == b.rows[i].config.resolution);
    CHECK(a.rows[i].feasible == b.rows[i].feasible);
  }
}

}  // namespace

TEST_CASE("pixels_per_frame matches the 16:9 hand calculations") {
  CHECK(pixels_per_frame(360) == 230400.0);
  CHECK(pixels_per_frame(480) == 409600.0);
  CHECK(pixels_per_frame(720) == 921600.0);
  CHECK(pixels_per_frame(960) == 1638400.0);
  CHECK(SamplingConfig{5.0, 960.0}.pixel_rate() == 8192000.0);
}

TEST_CASE("the config grid is the frame-rate by resolution cross product") {
  const auto grid = make_config_grid(default_fps(), default_ladder());
  REQUIRE(grid.size() == 20);
  CHECK(grid.front().frame_rate == 1.0);
  CHECK(grid.front().resolution == 360.0);
  CHECK(grid.back().frame_rate == 15.0);
  CHECK(grid.back().resolution == 960.0);
}

TEST_CASE("profile tables match a brute-force restatement of the rule") {
  const CameraState cam = make_camera();
  const auto grid = make_config_grid(default_fps(), default_ladder());
  const std::vector<double> levels = {6, 12, 18, 24, 30, 36, 42, 48, 54, 60};

  SUBCASE("distinct probe values") {
    const ProbeFn probe = [](const SamplingConfig& cfg, double budget) {
      return 0.1 + 1e-4 * (7.0 * cfg.frame_rate + 0.01 * cfg.resolution + budget);
    };
    for (const ProfileBias bias :
         {ProfileBias::resolution, ProfileBias::frame_rate}) {
      ProfilerOptions opts;
      opts.bias = bias;
      check_tables_equal(build_profile_table(cam, levels, grid, probe, opts),
                         brute_force_table(cam, levels, grid, probe, opts));
    }
  }
  SUBCASE("a constant probe exposes the tie-break bias") {
    const ProbeFn probe = [](const SamplingConfig&, double) { return 0.2; };
    ProfilerOptions opts;
    opts.bias = ProfileBias::resolution;
    const auto res_table = build_profile_table(cam, {60.0}, grid, probe, opts);
    // At 60 GPU-s the pixel budget is the full throughput: (5,960) is the
    // highest-resolution fit, (15,480) the highest-frame-rate fit.
    CHECK(res_table.rows[0].config.frame_rate == 5.0);
    CHECK(res_table.rows[0].config.resolution == 960.0);
    opts.bias = ProfileBias::frame_rate;
    const auto fps_table = build_profile_table(cam, {60.0}, grid, probe, opts);
    CHECK(fps_table.rows[0].config.frame_rate == 15.0);
    CHECK(fps_table.rows[0].config.resolution == 480.0);
    check_tables_equal(fps_table,
                       brute_force_table(cam, {60.0}, grid, probe, opts));
  }
  SUBCASE("randomized probes") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 10; ++trial) {
      const unsigned salt = rng();
      const ProbeFn probe = [salt](const SamplingConfig& cfg, double budget) {
        // Deterministic pseudo-random surface over (config, budget).
        const double x = cfg.frame_rate * 131.0 + cfg.resolution * 0.37 +
                         budget * 17.0 + salt % 997;
        return 0.1 + 0.5 * std::abs(std::sin(x));
      };
      ProfilerOptions opts;
      opts.bias = trial % 2 == 0 ? ProfileBias::resolution : ProfileBias::frame_rate;
      check_tables_equal(build_profile_table(cam, levels, grid, probe, opts),
                         brute_force_table(cam, levels, grid, probe, opts));
    }
  }
}

TEST_CASE("profiled configs never exceed the budget's pixel throughput") {
  const CameraState cam = make_camera();
  const auto grid = make_config_grid(default_fps(), default_ladder());
  const std::vector<double> levels = {1, 2.5, 6, 13, 27, 60, 120};
  const ProbeFn probe = [](const SamplingConfig& cfg, double budget) {
    return 0.1 + 1e-6 * cfg.pixel_rate() / (budget + 1.0);
  };
  const ProfilerOptions opts;
  const auto table = build_profile_table(cam, levels, grid, probe, opts);
  REQUIRE(table.rows.size() == levels.size());
  bool seen_feasible = false;
  for (const auto& row : table.rows) {
    const double pixel_budget =
        cam.gpu_pixel_throughput * row.budget_gpu_s / opts.window_duration_s;
    if (row.feasible)
      CHECK(row.config.pixel_rate() <= pixel_budget + 1e-9);
    // Feasibility is monotone in the budget.
    if (seen_feasible) CHECK(row.feasible);
    seen_feasible = seen_feasible || row.feasible;
  }
  CHECK_FALSE(table.rows.front().feasible);  // 1 GPU-s fits nothing
  // The infeasible fallback is the cheapest grid config.
  CHECK(table.rows.front().config.frame_rate == 1.0);
  CHECK(table.rows.front().config.resolution == 360.0);
  CHECK(table.rows.back().feasible);
}

TEST_CASE("build_profile_table validates its inputs") {
  const CameraState cam = make_camera();
  const auto grid = make_config_grid(default_fps(), default_ladder());
  const ProbeFn probe = [](const SamplingConfig&, double) { return 0.2; };
  const ProfilerOptions opts;
  CHECK_THROWS_AS(build_profile_table(cam, {}, grid, probe, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_profile_table(cam, {0.0}, grid, probe, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_profile_table(cam, {6.0}, {}, probe, opts),
                  std::invalid_argument);
}

TEST_CASE("select_config picks the nearest level not above the grant") {
  ProfileTable table;
  table.camera = "cam";
  for (int k = 1; k <= 10; ++k)
    table.rows.push_back({6.0 * k, {5.0 + k, 360.0 + k}, true});

  CHECK(select_config(table, 30.0, 1).budget_level_gpu_s == 30.0);
  CHECK(select_config(table, 29.99, 1).budget_level_gpu_s == 24.0);
  CHECK(select_config(table, 100.0, 1).budget_level_gpu_s == 60.0);
  CHECK(select_config(table, 6.0, 1).budget_level_gpu_s == 6.0);
  CHECK_FALSE(select_config(table, 6.0, 1).below_range);

  const auto below = select_config(table, 3.0, 1);
  CHECK(below.below_range);
  CHECK(below.budget_level_gpu_s == 6.0);

  CHECK_THROWS_AS(select_config(ProfileTable{}, 10.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(select_config(table, 10.0, 0), std::invalid_argument);
}

TEST_CASE("the per-member frame rate re-assembles the profiled rate exactly") {
  ProfileTable table;
  table.camera = "cam";
  table.rows.push_back({60.0, {15.0, 720.0}, true});
  for (int n = 1; n <= 7; ++n) {
    const auto selected = select_config(table, 60.0, n);
    CHECK(selected.config.resolution == 720.0);
    CHECK(selected.config.frame_rate * n == doctest::Approx(15.0).epsilon(1e-12));
  }
}

TEST_CASE("AIMD parameters broadcast the GPU share into bandwidth weights") {
  const FlowParams f = set_aimd_params("cam", 0.4, 1, 5e5);
  CHECK(f.id == "cam");
  CHECK(f.alpha_bps_per_rtt == doctest::Approx(2e5).epsilon(1e-12));
  CHECK(f.beta == 0.5);

  // Summed over a job's members, the steady-state weight alpha/(1-beta) is
  // exactly proportional to the job's GPU share.
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> share(0.05, 1.0);
  std::uniform_int_distribution<int> members(1, 8);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = share(rng);
    const int n = members(rng);
    double weight_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const FlowParams flow = set_aimd_params("m" + std::to_string(i), p, n, 5e5);
      weight_sum += flow.alpha_bps_per_rtt / (1.0 - flow.beta);
    }
    CHECK(weight_sum == doctest::Approx(2.0 * p * 5e5).epsilon(1e-9));
  }

  CHECK_THROWS_AS(set_aimd_params("x", 0.0, 1, 5e5), std::invalid_argument);
  CHECK_THROWS_AS(set_aimd_params("x", 1.2, 1, 5e5), std::invalid_argument);
  CHECK_THROWS_AS(set_aimd_params("x", 0.5, 0, 5e5), std::invalid_argument);
  CHECK_THROWS_AS(set_aimd_params("x", 0.5, 1, 0.0), std::invalid_argument);
}

TEST_CASE("compression quality tracks the delivered bitrate") {
  const SamplingConfig cfg{5.0, 960.0};  // 8.192e6 pixels/s

  // Reference bits-per-pixel 0.1 puts full quality at 819200 bps.
  const auto half = adapt_compression(409600.0, cfg, 0.1);
  CHECK(half.bits_per_pixel == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(half.quality_factor == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(adapt_compression(819200.0, cfg, 0.1).quality_factor ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(adapt_compression(5e6, cfg, 0.1).quality_factor == 1.0);

  const auto zero = adapt_compression(0.0, cfg, 0.1);
  CHECK(zero.quality_factor == 0.0);
  CHECK(zero.bits_per_pixel == 0.0);

  // Monotone and bounded over random rates.
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> rate(0.0, 2e6);
  for (int i = 0; i < 100; ++i) {
    double r1 = rate(rng), r2 = rate(rng);
    if (r1 > r2) std::swap(r1, r2);
    const double q1 = adapt_compression(r1, cfg, 0.1).quality_factor;
    const double q2 = adapt_compression(r2, cfg, 0.1).quality_factor;
    CHECK(q1 >= 0.0);
    CHECK(q2 <= 1.0);
    CHECK(q2 >= q1 - 1e-12);
  }

  CHECK_THROWS_AS(adapt_compression(-1.0, cfg, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(adapt_compression(1e5, cfg, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(adapt_compression(1e5, SamplingConfig{0.0, 0.0}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("the production probe is bounded and rewards bigger budgets") {
  const ModelParams params;
  const CameraState cam = make_camera();
  const ProbeFn probe = make_accuracy_probe(cam, params, 1e6, 0.1);

  const SamplingConfig cfg{5.0, 480.0};
  double prev = 0.0;
  for (const double budget : {6.0, 12.0, 24.0, 48.0, 96.0}) {
    const double acc = probe(cfg, budget);
    CHECK(acc >= params.acc_floor);
    CHECK(acc <= params.acc_ceil);
    CHECK(acc >= prev - 1e-12);
    prev = acc;
  }
  CHECK(prev > params.acc_floor);  // training moved the needle at all

  CHECK_THROWS_AS(make_accuracy_probe(cam, params, 0.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("profile tables survive a save/load round trip") {
  ProfileTable table;
  table.camera = "cam_x";
  table.rows.push_back({6.0, {1.0, 360.0}, false});
  table.rows.push_back({13.5, {2.5, 480.0}, true});
  table.rows.push_back({60.0, {15.0, 960.0}, true});

  std::ostringstream os;
  save_profile_table(table, os);
  std::istringstream is(os.str());
  const ProfileTable loaded = load_profile_table(is);
  CHECK(loaded.camera == "cam_x");
  check_tables_equal(loaded, table);
}

TEST_CASE("profile table parsing reports malformed input with line context") {
  {
    std::istringstream is("budget_gpu_s,fps,resolution\n");
    CHECK_THROWS_AS(load_profile_table(is), SchemaError);
  }
  {
    std::istringstream is("");
    CHECK_THROWS_AS(load_profile_table(is), SchemaError);
  }
  {
    std::istringstream is(
        "budget_gpu_s,fps,resolution,feasible\n"
        "6,1,360,1\n"
        "oops,2,480,1\n");
    try {
      load_profile_table(is);
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(e.field() == "profile:line 3");
    }
  }
}
