#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace sepnmf {

// Wall-clock seconds per named pipeline stage (svd, mvee, spa, ...).
struct StageTimings {
  std::vector<std::pair<std::string, double>> stages;

  void add(std::string name, double seconds) { stages.emplace_back(std::move(name), seconds); }
  void append(const StageTimings& other) {
    stages.insert(stages.end(), other.stages.begin(), other.stages.end());
  }
  double total() const {
    double t = 0.0;
    for (const auto& s : stages) t += s.second;
    return t;
  }
};

// Records the lifetime of the object as one stage, on a monotonic clock.
class ScopedStage {
 public:
  ScopedStage(StageTimings& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~ScopedStage() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    sink_.add(std::move(name_), dt.count());
  }
  ScopedStage(const ScopedStage&) = delete;
  ScopedStage& operator=(const ScopedStage&) = delete;

 private:
  StageTimings& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace sepnmf
