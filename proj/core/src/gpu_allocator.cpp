#include "ecco/gpu_allocator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ecco {
namespace {

double size_weight_sum(const std::vector<JobView>& jobs, double beta) {
  double sum = 0.0;
  for (const auto& j : jobs) sum += std::pow(static_cast<double>(j.member_count), beta);
  return sum;
}

}  // namespace

void AllocatorConfig::validate() const {
  if (obj_alpha < 0.0)
    throw std::invalid_argument("allocator: obj_alpha must be >= 0");
  if (size_exponent_beta > 1.0)
    throw std::invalid_argument("allocator: size_exponent_beta must be <= 1");
  if (micro_windows < 1)
    throw std::invalid_argument("allocator: micro_windows must be positive");
  if (!(micro_window_duration_s > 0.0))
    throw std::invalid_argument("allocator: micro_window_duration_s must be positive");
  if (gpu_count < 1)
    throw std::invalid_argument("allocator: gpu_count must be positive");
}

double objective_value(const std::vector<std::pair<int, double>>& jobs,
                       const AllocatorConfig& cfg) {
  cfg.validate();
  if (jobs.empty()) throw std::invalid_argument("objective_value: no jobs");
  double weight_sum = 0.0;
  double weighted_acc = 0.0;
  double min_acc = jobs.front().second;
  for (const auto& [n, acc] : jobs) {
    if (n < 1) throw std::invalid_argument("objective_value: member count must be >= 1");
    const double w = std::pow(static_cast<double>(n), cfg.size_exponent_beta);
    weight_sum += w;
    weighted_acc += w * acc;
    min_acc = std::min(min_acc, acc);
  }
  return cfg.obj_alpha * weighted_acc / weight_sum + min_acc;
}

std::map<JobId, double> cal_objective_gain(const std::vector<JobView>& jobs,
                                           const std::map<JobId, double>& acc,
                                           const std::map<JobId, double>& acc_gain,
                                           const AllocatorConfig& cfg) {
  cfg.validate();
  if (jobs.empty()) throw std::invalid_argument("cal_objective_gain: no jobs");
  for (const auto& j : jobs) {
    if (!acc.count(j.id) || !acc_gain.count(j.id))
      throw std::invalid_argument("cal_objective_gain: job " + std::to_string(j.id) +
                                  " missing accuracy measurements");
  }
  const double weight_sum = size_weight_sum(jobs, cfg.size_exponent_beta);

  std::map<JobId, double> obj_gain;
  JobId min_job = jobs.front().id;
  double min_acc = acc.at(min_job);
  for (const auto& j : jobs) {
    const double w = std::pow(static_cast<double>(j.member_count), cfg.size_exponent_beta);
    obj_gain[j.id] = cfg.obj_alpha * w / weight_sum * acc_gain.at(j.id);
    const double a = acc.at(j.id);
    if (a < min_acc || (a == min_acc && j.id < min_job)) {
      min_acc = a;
      min_job = j.id;
    }
  }
  if (cfg.fairness_bonus) obj_gain[min_job] += acc_gain.at(min_job);
  return obj_gain;
}

std::vector<GpuAllocation> estimate_shares(const std::map<JobId, double>& obj_gain,
                                           const AllocatorConfig& cfg,
                                           bool* degenerate) {
  cfg.validate();
  if (obj_gain.empty()) throw std::invalid_argument("estimate_shares: no jobs");
  const double total_gpu_s = cfg.gpu_count * cfg.window_duration_s();

  double total = 0.0;
  for (const auto& [id, g] : obj_gain) total += std::max(0.0, g);
  const bool uniform = !(total > 0.0);
  if (degenerate) *degenerate = uniform;

  std::vector<GpuAllocation> shares;
  shares.reserve(obj_gain.size());
  for (const auto& [id, g] : obj_gain) {
    const double p = uniform ? 1.0 / static_cast<double>(obj_gain.size())
                             : std::max(0.0, g) / total;
    shares.push_back({id, p * total_gpu_s, p});
  }
  return shares;
}

WindowAllocation::WindowAllocation(std::vector<JobView> jobs, const AllocatorConfig& cfg,
                                   SchedulePolicy policy, int window_index)
    : jobs_(std::move(jobs)), cfg_(cfg), policy_(policy), window_index_(window_index) {
  cfg_.validate();
  std::sort(jobs_.begin(), jobs_.end(),
            [](const JobView& a, const JobView& b) { return a.id < b.id; });
  for (const auto& j : jobs_) {
    if (j.member_count < 1)
      throw std::invalid_argument("allocate_window: job member count must be >= 1");
  }
  for (std::size_t i = 1; i < jobs_.size(); ++i) {
    if (jobs_[i].id == jobs_[i - 1].id)
      throw std::invalid_argument("allocate_window: duplicate job id " +
                                  std::to_string(jobs_[i].id));
  }
  if (jobs_.empty())
    throw InfeasibleScheduleError(window_index_, "allocate_window: no jobs to schedule");
  if (static_cast<int>(jobs_.size()) > cfg_.micro_windows)
    throw InfeasibleScheduleError(
        window_index_, "window " + std::to_string(window_index_) + ": " +
                           std::to_string(jobs_.size()) + " jobs exceed " +
                           std::to_string(cfg_.micro_windows) + " micro-windows");
  budget_ = cfg_.micro_windows;
}

void WindowAllocation::run_micro(JobId job, TrainingBackend& backend) {
  const double acc_before = backend.evaluate(job);
  backend.train(job, cfg_.gpu_count * cfg_.micro_window_duration_s);
  const double acc_after = backend.evaluate(job);
  --budget_;
  acc_[job] = acc_after;
  gain_[job] = acc_after - acc_before;
  const int index = static_cast<int>(schedule_.records.size());
  schedule_.records.push_back({index, job, acc_before, acc_after});
  schedule_.per_job_micro[job] += 1;
}

std::map<JobId, double> WindowAllocation::current_scores() const {
  if (policy_ == SchedulePolicy::total_acc_greedy) {
    std::map<JobId, double> scores;
    for (const auto& j : jobs_) scores[j.id] = j.member_count * gain_.at(j.id);
    return scores;
  }
  return cal_objective_gain(jobs_, acc_, gain_, cfg_);
}

JobId WindowAllocation::pick_next() const {
  const auto scores = current_scores();
  JobId best = jobs_.front().id;
  double best_score = scores.at(best);
  for (const auto& j : jobs_) {
    const double s = scores.at(j.id);
    if (s > best_score) {
      best_score = s;
      best = j.id;
    }
  }
  return best;
}

void WindowAllocation::run_initial_pass(TrainingBackend& backend) {
  if (initial_done_)
    throw std::logic_error("allocate_window: initial pass already run");
  for (const auto& j : jobs_) run_micro(j.id, backend);
  initial_done_ = true;
  if (policy_ != SchedulePolicy::naive) initial_scores_ = current_scores();
}

void WindowAllocation::run_remaining(TrainingBackend& backend) {
  if (!initial_done_)
    throw std::logic_error("allocate_window: initial pass has not run");
  while (budget_ > 0) {
    JobId pick;
    if (policy_ == SchedulePolicy::naive) {
      pick = jobs_[rr_cursor_ % jobs_.size()].id;
      ++rr_cursor_;
    } else {
      pick = pick_next();
    }
    run_micro(pick, backend);
  }
}

WindowSchedule allocate_window(const std::vector<JobView>& jobs,
                               const AllocatorConfig& cfg, TrainingBackend& backend) {
  WindowAllocation alloc(jobs, cfg, SchedulePolicy::ecco);
  alloc.run_initial_pass(backend);
  alloc.run_remaining(backend);
  return alloc.schedule();
}

WindowSchedule baseline_allocate(SchedulePolicy policy, const std::vector<JobView>& jobs,
                                 const AllocatorConfig& cfg, TrainingBackend& backend) {
  WindowAllocation alloc(jobs, cfg, policy);
  alloc.run_initial_pass(backend);
  alloc.run_remaining(backend);
  return alloc.schedule();
}

}  // namespace ecco
