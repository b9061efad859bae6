#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sepnmf/lowrank.hpp"
#include "sepnmf/timing.hpp"

namespace sepnmf::cli {

struct RunRecord {
  std::uint64_t seed = 0;
  std::optional<double> recovery_rate;
  std::optional<double> abs_error;
  std::optional<double> rel_error;
  std::vector<Index> indices;  // 1-based
  StageTimings stages;
  std::optional<std::string> error;
};

struct ReportParameters {
  Index d = 0;
  Index m = 0;
  Index k = 0;
  std::optional<Index> q;
  double delta = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  Index repetitions = 1;
};

struct Summary {
  Index count = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

struct ExperimentReport {
  std::string method;
  ReportParameters parameters;
  std::vector<RunRecord> records;
  // recovery_rate, abs_error, rel_error and wall_seconds over records that
  // carry the field.
  std::map<std::string, Summary> aggregates;
  std::optional<BoundReport> bounds;
  std::vector<std::string> notes;
  std::optional<std::string> error;
  std::string toolkit_version;
};

std::optional<Summary> summarize(std::vector<double> values);
std::map<std::string, Summary> compute_aggregates(const std::vector<RunRecord>& records);

// Fills aggregates and the toolkit version.
void finalize(ExperimentReport& report);

nlohmann::json bounds_to_json(const BoundReport& b);
nlohmann::json to_json(const ExperimentReport& report);
// Throws Parse when a field is missing or the stored aggregates differ from
// the recomputation over the records.
ExperimentReport report_from_json(const nlohmann::json& j);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Drops timing keys (wall_seconds, stages) recursively; used to compare runs.
nlohmann::json without_timing(nlohmann::json j);

}  // namespace sepnmf::cli
