#ifndef ECCO_TESTS_SUPPORT_SCRIPTED_BACKEND_HPP_
#define ECCO_TESTS_SUPPORT_SCRIPTED_BACKEND_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "ecco/gpu_allocator.hpp"

namespace testsupport {

// Training environment with per-job scripted accuracy gains: each train call
// consumes the job's next gain (the last entry repeats once the script runs
// out) and accuracy saturates at 1. Lets allocator tests fix the outcome of
// every micro-window in advance.
class ScriptedBackend : public ecco::TrainingBackend {
 public:
  void add_job(ecco::JobId id, double start_acc, std::vector<double> gains) {
    acc_[id] = start_acc;
    gains_[id] = std::move(gains);
    cursor_[id] = 0;
  }

  double evaluate(ecco::JobId id) override { return acc_.at(id); }

  void train(ecco::JobId id, double /*gpu_seconds*/) override {
    const auto& gains = gains_.at(id);
    std::size_t& cursor = cursor_[id];
    double gain = 0.0;
    if (!gains.empty()) gain = gains[std::min(cursor, gains.size() - 1)];
    ++cursor;
    acc_[id] = std::min(1.0, acc_.at(id) + gain);
  }

  double accuracy(ecco::JobId id) const { return acc_.at(id); }

 private:
  std::map<ecco::JobId, double> acc_;
  std::map<ecco::JobId, std::vector<double>> gains_;
  std::map<ecco::JobId, std::size_t> cursor_;
};

}  // namespace testsupport

#endif  // ECCO_TESTS_SUPPORT_SCRIPTED_BACKEND_HPP_
