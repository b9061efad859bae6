#include "sepnmf/cli/report.hpp"

#include <algorithm>
#include <cmath>

#include "sepnmf/cli/files.hpp"
#include "sepnmf/error.hpp"
#include "sepnmf/random.hpp"
#include "sepnmf/version.hpp"

namespace sepnmf::cli {

using nlohmann::json;

std::optional<Summary> summarize(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  Summary s;
  s.count = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const Index n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::map<std::string, Summary> compute_aggregates(const std::vector<RunRecord>& records) {
  std::vector<double> recovery, abs_error, rel_error, wall;
  for (const RunRecord& r : records) {
    if (r.recovery_rate) recovery.push_back(*r.recovery_rate);
    if (r.abs_error) abs_error.push_back(*r.abs_error);
    if (r.rel_error) rel_error.push_back(*r.rel_error);
    if (!r.stages.stages.empty()) wall.push_back(r.stages.total());
  }
  std::map<std::string, Summary> out;
  const auto put = [&](const char* name, std::vector<double> v) {
    if (auto s = summarize(std::move(v))) out.emplace(name, *s);
  };
  put("recovery_rate", std::move(recovery));
  put("abs_error", std::move(abs_error));
  put("rel_error", std::move(rel_error));
  put("wall_seconds", std::move(wall));
  return out;
}

void finalize(ExperimentReport& report) {
  report.aggregates = compute_aggregates(report.records);
  report.toolkit_version = kVersion;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json stages_to_json(const StageTimings& t) {
  json out = json::array();
  for (const auto& [name, seconds] : t.stages) out.push_back({{"stage", name}, {"seconds", seconds}});
  return out;
}

json summary_to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

bool close(double a, double b) {
  return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

json bounds_to_json(const BoundReport& b) {
  return {{"k", b.k},
          {"q", b.power},
          {"sigma_k", b.sigma_k},
          {"sigma_k1", b.sigma_k1},
          {"sigma_min_ai", b.sigma_min_ai},
          {"rho", b.rho},
          {"g1_min", b.g1_min},
          {"g2_max", b.g2_max},
          {"theorem4_bound", b.theorem4_bound},
          {"corollary9_bound", optional_number(b.corollary9_bound)},
          {"proposition7_bound", optional_number(b.proposition7_bound)},
          {"lemma6_rhs", optional_number(b.lemma6_rhs)},
          {"singular_z1", b.singular_z1},
          {"achieved_error", b.achieved_error},
          {"rank_b", b.rank_b}};
}

json to_json(const ExperimentReport& report) {
  const ReportParameters& p = report.parameters;
  json records = json::array();
  for (const RunRecord& r : report.records) {
    json rec = {{"seed", r.seed},
                {"recovery_rate", optional_number(r.recovery_rate)},
                {"abs_error", optional_number(r.abs_error)},
                {"rel_error", optional_number(r.rel_error)},
                {"indices", r.indices},
                {"stages", stages_to_json(r.stages)},
                {"wall_seconds", r.stages.total()}};
    if (r.error) rec["error"] = *r.error;
    records.push_back(std::move(rec));
  }
  json aggregates = json::object();
  for (const auto& [name, s] : report.aggregates) aggregates[name] = summary_to_json(s);
  json out = {{"toolkit_version", report.toolkit_version},
              {"rng", kRngName},
              {"method", report.method},
              {"parameters",
               {{"d", p.d},
                {"m", p.m},
                {"k", p.k},
                {"q", p.q ? json(*p.q) : json(nullptr)},
                {"delta", p.delta},
                {"eps", p.eps},
                {"seed", p.seed},
                {"repetitions", p.repetitions}}},
              {"records", std::move(records)},
              {"aggregates", std::move(aggregates)},
              {"notes", report.notes}};
  if (report.bounds) out["bounds"] = bounds_to_json(*report.bounds);
  if (report.error) out["error"] = *report.error;
  return out;
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  try {
    r.toolkit_version = j.at("toolkit_version").get<std::string>();
    r.method = j.at("method").get<std::string>();
    const json& p = j.at("parameters");
    r.parameters.d = p.at("d").get<Index>();
    r.parameters.m = p.at("m").get<Index>();
    r.parameters.k = p.at("k").get<Index>();
    if (!p.at("q").is_null()) r.parameters.q = p.at("q").get<Index>();
    r.parameters.delta = p.at("delta").get<double>();
    r.parameters.eps = p.at("eps").get<double>();
    r.parameters.seed = p.at("seed").get<std::uint64_t>();
    r.parameters.repetitions = p.at("repetitions").get<Index>();
    for (const json& rec : j.at("records")) {
      RunRecord out;
      out.seed = rec.at("seed").get<std::uint64_t>();
      out.recovery_rate = read_optional(rec, "recovery_rate");
      out.abs_error = read_optional(rec, "abs_error");
      out.rel_error = read_optional(rec, "rel_error");
      out.indices = rec.at("indices").get<std::vector<Index>>();
      for (const json& s : rec.at("stages")) {
        out.stages.add(s.at("stage").get<std::string>(), s.at("seconds").get<double>());
      }
      if (rec.contains("error")) out.error = rec.at("error").get<std::string>();
      r.records.push_back(std::move(out));
    }
    for (const auto& [name, s] : j.at("aggregates").items()) {
      Summary sum;
      sum.count = s.at("count").get<Index>();
      sum.mean = s.at("mean").get<double>();
      sum.median = s.at("median").get<double>();
      sum.min = s.at("min").get<double>();
      sum.max = s.at("max").get<double>();
      r.aggregates.emplace(name, sum);
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }

  const auto expected = compute_aggregates(r.records);
  bool same = expected.size() == r.aggregates.size();
  for (const auto& [name, s] : expected) {
    const auto it = r.aggregates.find(name);
    if (it == r.aggregates.end()) {
      same = false;
      break;
    }
    const Summary& got = it->second;
    same = same && got.count == s.count && close(got.mean, s.mean) && close(got.median, s.median) &&
           close(got.min, s.min) && close(got.max, s.max);
  }
  if (!same) throw Error(ErrorCode::kParse, "report aggregates do not match its records");
  return r;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

json without_timing(json j) {
  if (j.is_object()) {
    j.erase("wall_seconds");
    j.erase("stages");
    for (auto& [key, value] : j.items()) value = without_timing(std::move(value));
  } else if (j.is_array()) {
    for (auto& value : j) value = without_timing(std::move(value));
  }
  return j;
}

}  // namespace sepnmf::cli
