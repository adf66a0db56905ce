#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecco/metrics.hpp"
#include "ecco/orchestrator.hpp"
#include "ecco/scenario.hpp"
#include "ecco/transmission.hpp"

namespace {

struct RunOptions {
  std::string scenario_path;
  std::string policy;
  std::string out_dir;
  unsigned seed = 0;
  bool seed_set = false;
};

ecco::ScenarioConfig load_with_overrides(const RunOptions& opts) {
  ecco::ScenarioConfig cfg = ecco::load_scenario(opts.scenario_path);
  if (!opts.policy.empty()) cfg.policy = ecco::parse_policy(opts.policy);
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

int cmd_run(const RunOptions& opts) {
  ecco::Simulation sim(load_with_overrides(opts));
  sim.run();
  if (!opts.out_dir.empty()) {
    ecco::write_outputs(sim, opts.out_dir);
    std::cerr << "wrote " << opts.out_dir << "/trace.csv and " << opts.out_dir
              << "/summary.json\n";
  }
  std::cout << sim.summary_json();
  return 0;
}

int cmd_profile(const std::string& scenario_path, const std::string& camera,
                const std::string& out_file) {
  const ecco::ScenarioConfig cfg = ecco::load_scenario(scenario_path);
  ecco::Simulation sim(cfg);
  const ecco::ProfileTable& table = sim.profile(camera);
  if (out_file.empty()) {
    ecco::save_profile_table(table, std::cout);
  } else {
    ecco::save_profile_table_file(table, out_file);
    std::cerr << "wrote " << out_file << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& scenario_path, std::vector<std::string> policies) {
  if (policies.empty()) policies = {"ecco", "naive", "total_acc_greedy"};
  const ecco::ScenarioConfig base = ecco::load_scenario(scenario_path);

  struct Outcome {
    std::string policy;
    std::vector<double> window_means;
    double final_mean = 0.0;
    double final_min = 0.0;
  };
  std::vector<Outcome> outcomes;
  for (const auto& name : policies) {
    ecco::ScenarioConfig cfg = base;
    cfg.policy = ecco::parse_policy(name);
    const ecco::MetricsTrace trace = ecco::run_scenario(cfg);
    Outcome outcome;
    outcome.policy = name;
    outcome.window_means = ecco::mean_accuracy_per_window(trace);
    const auto final_acc = ecco::final_accuracy(trace);
    double sum = 0.0, lo = 1.0;
    for (const auto& [camera, acc] : final_acc) {
      sum += acc;
      lo = std::min(lo, acc);
    }
    outcome.final_mean = final_acc.empty() ? 0.0 : sum / final_acc.size();
    outcome.final_min = final_acc.empty() ? 0.0 : lo;
    outcomes.push_back(std::move(outcome));
  }

  std::printf("%-18s %12s %12s\n", "policy", "final_mean", "final_min");
  for (const auto& o : outcomes)
    std::printf("%-18s %12.4f %12.4f\n", o.policy.c_str(), o.final_mean, o.final_min);
  std::printf("\nmean accuracy per window:\n");
  std::size_t windows = 0;
  for (const auto& o : outcomes) windows = std::max(windows, o.window_means.size());
  std::printf("%-8s", "window");
  for (const auto& o : outcomes) std::printf(" %16s", o.policy.c_str());
  std::printf("\n");
  for (std::size_t w = 0; w < windows; ++w) {
    std::printf("%-8zu", w);
    for (const auto& o : outcomes) {
      if (w < o.window_means.size())
        std::printf(" %16.4f", o.window_means[w]);
      else
        std::printf(" %16s", "-");
    }
    std::printf("\n");
  }
  return 0;
}

int cmd_analyze(const std::string& trace_path, double target_acc, bool target_set) {
  const ecco::MetricsTrace trace = ecco::read_trace_csv_file(trace_path);
  const auto means = ecco::mean_accuracy_per_window(trace);
  std::printf("windows: %zu\n", means.size());
  for (std::size_t w = 0; w < means.size(); ++w)
    std::printf("  window %-4zu mean_acc %.4f\n", w, means[w]);
  std::printf("final accuracy per camera:\n");
  for (const auto& [camera, acc] : ecco::final_accuracy(trace))
    std::printf("  %-12s %.4f\n", camera.c_str(), acc);
  if (target_set) {
    std::printf("response time to accuracy %.3f:\n", target_acc);
    for (const auto& [camera, r] : ecco::response_time(trace, target_acc)) {
      if (r.response_s)
        std::printf("  %-12s requested %.1fs, reached after %.1fs\n", camera.c_str(),
                    r.request_time_s, *r.response_s);
      else
        std::printf("  %-12s requested %.1fs, never reached target\n", camera.c_str(),
                    r.request_time_s);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for grouped continuous-learning video analytics"};
  app.require_subcommand(1);

  RunOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and emit trace + summary");
  run->add_option("scenario", run_opts.scenario_path, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--policy", run_opts.policy,
                  "Override schedule policy (ecco|naive|total_acc_greedy)");
  run->add_option("--seed", run_opts.seed, "Override scenario seed")
      ->each([&](const std::string&) { run_opts.seed_set = true; });
  run->add_option("--out", run_opts.out_dir, "Directory for trace.csv + summary.json");

  std::string profile_scenario, profile_camera, profile_out;
  CLI::App* profile =
      app.add_subcommand("profile", "Build and print one camera's profile table");
  profile->add_option("scenario", profile_scenario, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  profile->add_option("--camera", profile_camera, "Camera id")->required();
  profile->add_option("--out", profile_out, "Output file (default: stdout)");

  std::string compare_scenario;
  std::vector<std::string> compare_policies;
  CLI::App* compare =
      app.add_subcommand("compare", "Run a scenario under several policies");
  compare->add_option("scenario", compare_scenario, "Scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--policies", compare_policies, "Policies to compare")
      ->delimiter(',');

  std::string analyze_trace;
  double target_acc = 0.0;
  CLI::App* analyze = app.add_subcommand("analyze", "Summarize a trace CSV");
  analyze->add_option("trace", analyze_trace, "trace.csv produced by run")
      ->required()
      ->check(CLI::ExistingFile);
  CLI::Option* target_opt =
      analyze->add_option("--target-acc", target_acc, "Report response times to this accuracy");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (profile->parsed()) return cmd_profile(profile_scenario, profile_camera, profile_out);
    if (compare->parsed()) return cmd_compare(compare_scenario, compare_policies);
    if (analyze->parsed())
      return cmd_analyze(analyze_trace, target_acc, target_opt->count() > 0);
  } catch (const ecco::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const ecco::InfeasibleScheduleError& e) {
    std::cerr << "infeasible schedule: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
