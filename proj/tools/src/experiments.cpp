#include "sepnmf/cli/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepnmf/cli/files.hpp"
#include "sepnmf/cli/parallel.hpp"
#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"
#include "sepnmf/lowrank.hpp"
#include "sepnmf/metrics.hpp"
#include "sepnmf/random.hpp"
#include "sepnmf/select.hpp"
#include "sepnmf/synth.hpp"

namespace sepnmf::cli {

Scale parse_scale(std::string_view name) {
  if (name == "smoke") return Scale::kSmoke;
  if (name == "desk") return Scale::kDesk;
  throw Error(ErrorCode::kParse, "unknown scale '" + std::string(name) + "'");
}

NoiseGrid figure_grid(Scale scale, std::uint64_t base_seed) {
  NoiseGrid g;
  g.base_seed = base_seed;
  if (scale == Scale::kDesk) {
    g.d = 50;
    g.m = 2000;
    g.k = 10;
    for (int i = 0; i <= 20; ++i) g.factors.push_back(0.1 * i);
    g.instances = 20;
  } else {
    g.d = 20;
    g.m = 200;
    g.k = 4;
    g.factors = {0.0, 0.5, 1.0};
    g.instances = 3;
  }
  return g;
}

std::uint64_t instance_seed(const NoiseGrid& grid, Index i) { return derive_seed(grid.base_seed, i); }

double calibrate_sigma_star(const NoiseGrid& grid, unsigned jobs) {
  std::vector<double> sigma(grid.instances);
  parallel_for(grid.instances, jobs, [&](Index i) {
    const SyntheticInstance inst = generate_instance(grid.d, grid.m, grid.k, 0.0, instance_seed(grid, i));
    sigma[i] = singular_values(inst.f).back();
  });
  std::sort(sigma.begin(), sigma.end());
  const Index n = sigma.size();
  if (n == 0) throw Error(ErrorCode::kBadShape, "noise grid has no instances");
  return n % 2 ? sigma[n / 2] : 0.5 * (sigma[n / 2 - 1] + sigma[n / 2]);
}

const std::vector<Index>& fig1_powers() {
  static const std::vector<Index> powers{1, 2, 5, 10, 15};
  return powers;
}

namespace {

ExperimentReport cell_report(const NoiseGrid& grid, std::string method, std::optional<Index> q,
                             double delta, double eps) {
  ExperimentReport r;
  r.method = std::move(method);
  r.parameters.d = grid.d;
  r.parameters.m = grid.m;
  r.parameters.k = grid.k;
  r.parameters.q = q;
  r.parameters.delta = delta;
  r.parameters.eps = eps;
  r.parameters.seed = grid.base_seed;
  r.parameters.repetitions = grid.instances;
  return r;
}

std::vector<Index> one_based(const IndexSet& s) { return s.one_based(); }

}  // namespace

ApproxSweep run_approx_sweep(const NoiseGrid& grid, const std::vector<Index>& powers, unsigned jobs) {
  ApproxSweep sweep;
  sweep.sigma_star = calibrate_sigma_star(grid, jobs);
  const Index nf = grid.factors.size();
  const Index np = powers.size();
  // records[(f * instances + i) * np + p]
  std::vector<RunRecord> records(nf * grid.instances * np);
  parallel_for(nf * grid.instances, jobs, [&](Index unit) {
    const Index f = unit / grid.instances;
    const Index i = unit % grid.instances;
    const std::uint64_t seed = instance_seed(grid, i);
    const double delta = grid.factors[f] * sweep.sigma_star;
    RunRecord* out = &records[unit * np];
    for (Index p = 0; p < np; ++p) out[p].seed = seed;
    try {
      const SyntheticInstance inst = generate_instance(grid.d, grid.m, grid.k, delta, seed);
      const double norm_a = spectral_norm(inst.a);
      for (Index p = 0; p < np; ++p) {
        try {
          const RankKApprox r = spa_rank_approx(inst.a, grid.k, powers[p]);
          out[p].abs_error = r.error2;
          out[p].rel_error = norm_a > 0.0 ? r.error2 / norm_a : 0.0;
          out[p].stages = r.timings;
          out[p].indices = one_based(*r.seed_indices);
        } catch (const Error& e) {
          out[p].error = e.what();
        }
      }
    } catch (const Error& e) {
      for (Index p = 0; p < np; ++p) out[p].error = e.what();
    }
  });
  for (Index f = 0; f < nf; ++f) {
    const double delta = grid.factors[f] * sweep.sigma_star;
    for (Index p = 0; p < np; ++p) {
      ApproxCell cell;
      cell.factor = grid.factors[f];
      cell.delta = delta;
      cell.q = powers[p];
      cell.report = cell_report(grid, "spa_rank_approx", powers[p], delta, 0.0);
      for (Index i = 0; i < grid.instances; ++i) {
        cell.report.records.push_back(records[(f * grid.instances + i) * np + p]);
      }
      finalize(cell.report);
      sweep.cells.push_back(std::move(cell));
    }
  }
  return sweep;
}

std::string SelectCase::label() const { return q ? method + "(q=" + std::to_string(*q) + ")" : method; }

std::vector<SelectCase> expand_cases(const std::vector<std::string>& methods,
                                     const std::vector<Index>& powers) {
  std::vector<SelectCase> out;
  for (const std::string& m : methods) {
    if (std::find(selector_names().begin(), selector_names().end(), m) == selector_names().end()) {
      throw Error(ErrorCode::kParse, "unknown method '" + m + "'");
    }
    if (m == "mpspa" || m == "merspa") {
      if (powers.empty()) {
        out.push_back({m, kDefaultPower});
      } else {
        for (Index q : powers) out.push_back({m, q});
      }
    } else {
      out.push_back({m, std::nullopt});
    }
  }
  return out;
}

std::vector<SelectCase> fig2_cases(Scale scale) {
  if (scale == Scale::kSmoke) return expand_cases({"spa", "pspa", "erspa", "mpspa", "merspa"}, {1, 15});
  std::vector<SelectCase> out =
      expand_cases({"spa", "pspa", "erspa", "prewhiten", "spaspa", "mpspa"}, fig1_powers());
  for (const SelectCase& c : expand_cases({"merspa"}, {1, 5, 15})) out.push_back(c);
  return out;
}

RecoverySweep run_recovery_sweep(const NoiseGrid& grid, const std::vector<SelectCase>& cases,
                                 double eps, unsigned jobs) {
  RecoverySweep sweep;
  sweep.sigma_star = calibrate_sigma_star(grid, jobs);
  const Index nf = grid.factors.size();
  const Index nc = cases.size();
  std::vector<RunRecord> records(nf * grid.instances * nc);
  parallel_for(nf * grid.instances, jobs, [&](Index unit) {
    const Index f = unit / grid.instances;
    const Index i = unit % grid.instances;
    const std::uint64_t seed = instance_seed(grid, i);
    const double delta = grid.factors[f] * sweep.sigma_star;
    RunRecord* out = &records[unit * nc];
    for (Index c = 0; c < nc; ++c) out[c].seed = seed;
    try {
      const SyntheticInstance inst = generate_instance(grid.d, grid.m, grid.k, delta, seed);
      for (Index c = 0; c < nc; ++c) {
        SelectOptions o;
        o.eps = eps;
        if (cases[c].q) o.q = *cases[c].q;
        try {
          const SelectorResult r = run_selector(cases[c].method, inst.a, grid.k, o);
          out[c].recovery_rate = recovery_rate(r.indices, inst.true_indices);
          out[c].indices = one_based(r.indices);
          out[c].stages = r.timing;
        } catch (const Error& e) {
          out[c].error = e.what();
        }
      }
    } catch (const Error& e) {
      for (Index c = 0; c < nc; ++c) out[c].error = e.what();
    }
  });
  for (Index f = 0; f < nf; ++f) {
    const double delta = grid.factors[f] * sweep.sigma_star;
    for (Index c = 0; c < nc; ++c) {
      RecoveryCell cell;
      cell.factor = grid.factors[f];
      cell.delta = delta;
      cell.selector = cases[c];
      cell.report = cell_report(grid, cases[c].method, cases[c].q, delta, eps);
      for (Index i = 0; i < grid.instances; ++i) {
        cell.report.records.push_back(records[(f * grid.instances + i) * nc + c]);
      }
      finalize(cell.report);
      sweep.cells.push_back(std::move(cell));
    }
  }
  return sweep;
}

std::vector<TimingShape> tab2_shapes(Scale scale) {
  if (scale == Scale::kSmoke) return {{20, 600, 4}, {30, 400, 4}};
  return {{50, 3000, 10}, {50, 5000, 10}, {100, 1000, 10}, {100, 20000, 10}};
}

namespace {

double stage(const StageTimings& t, std::string_view name) {
  double s = 0.0;
  for (const auto& [n, v] : t.stages)
    if (n == name) s += v;
  return s;
}

}  // namespace

TimingRow run_timing_case(const TimingShape& shape, Index q, std::uint64_t seed, Index repetitions) {
  TimingRow row;
  row.shape = shape;
  row.q = q;
  row.seed = seed;
  row.repetitions = repetitions;
  try {
    const SyntheticInstance probe = generate_instance(shape.d, shape.m, shape.k, 0.0, seed);
    row.delta = 0.5 * singular_values(probe.f).back();
    const SyntheticInstance inst = generate_instance(shape.d, shape.m, shape.k, row.delta, seed);
    const double norm_a = spectral_norm(inst.a);
    row.spa_seconds = std::numeric_limits<double>::infinity();
    row.svd_seconds = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < repetitions; ++r) {
      const RankKApprox spa = spa_rank_approx(inst.a, shape.k, q);
      row.spa_seconds = std::min(row.spa_seconds, spa.timings.total() - stage(spa.timings, "error"));
      row.spa_rel_error = spa.error2 / norm_a;
      const RankKApprox svd = svd_rank_approx(inst.a, shape.k);
      row.svd_seconds = std::min(row.svd_seconds, svd.timings.total() - stage(svd.timings, "error"));
      row.svd_rel_error = svd.error2 / norm_a;
    }
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

namespace {

std::string fmt(double v) { return format_double(v); }

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string mean_of(const ExperimentReport& r, const char* key) {
  const auto it = r.aggregates.find(key);
  return it == r.aggregates.end() ? "" : fmt(it->second.mean);
}

Index failures(const ExperimentReport& r) {
  Index n = 0;
  for (const RunRecord& rec : r.records) n += rec.error ? 1 : 0;
  return n;
}

}  // namespace

std::string approx_sweep_csv(const ApproxSweep& sweep) {
  std::string out =
      "delta,q,mean_abs_error,best_error_upper,delta_factor,mean_rel_error,instances,failures\n";
  for (const ApproxCell& c : sweep.cells) {
    out += fmt(c.delta) + "," + std::to_string(c.q) + "," + mean_of(c.report, "abs_error") + "," +
           fmt(c.delta) + "," + fmt(c.factor) + "," + mean_of(c.report, "rel_error") + "," +
           std::to_string(c.report.records.size()) + "," + std::to_string(failures(c.report)) + "\n";
  }
  return out;
}

std::string recovery_sweep_csv(const RecoverySweep& sweep) {
  std::string out =
      "delta,method,q,mean_recovery,min_recovery,max_recovery,delta_factor,instances,failures\n";
  for (const RecoveryCell& c : sweep.cells) {
    const auto it = c.report.aggregates.find("recovery_rate");
    const bool have = it != c.report.aggregates.end();
    out += fmt(c.delta) + "," + c.selector.method + "," +
           (c.selector.q ? std::to_string(*c.selector.q) : std::string()) + "," +
           (have ? fmt(it->second.mean) : "") + "," + (have ? fmt(it->second.min) : "") + "," +
           (have ? fmt(it->second.max) : "") + "," + fmt(c.factor) + "," +
           std::to_string(c.report.records.size()) + "," + std::to_string(failures(c.report)) + "\n";
  }
  return out;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::string out =
      "d,m,k,q,delta,seed,repetitions,spa_rel_error,svd_rel_error,error_ratio,spa_seconds,svd_seconds,"
      "error\n";
  for (const TimingRow& r : rows) {
    const double ratio = r.svd_rel_error > 0.0 ? r.spa_rel_error / r.svd_rel_error : 1.0;
    out += std::to_string(r.shape.d) + "," + std::to_string(r.shape.m) + "," + std::to_string(r.shape.k) +
           "," + std::to_string(r.q) + "," + fmt(r.delta) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.repetitions) + "," + fmt(r.spa_rel_error) + "," + fmt(r.svd_rel_error) + "," +
           fmt(ratio) + "," + fmt(r.spa_seconds) + "," + fmt(r.svd_seconds) + "," +
           csv_field(r.error.value_or("")) + "\n";
  }
  return out;
}

}  // namespace sepnmf::cli
