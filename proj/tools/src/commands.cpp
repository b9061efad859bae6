#include "sepnmf/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "sepnmf/cli/experiments.hpp"
#include "sepnmf/cli/files.hpp"
#include "sepnmf/cli/matrix_io.hpp"
#include "sepnmf/cli/report.hpp"
#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"
#include "sepnmf/lowrank.hpp"
#include "sepnmf/metrics.hpp"
#include "sepnmf/random.hpp"
#include "sepnmf/select.hpp"
#include "sepnmf/synth.hpp"
#include "sepnmf/version.hpp"

namespace sepnmf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string format = "mtx";
  double eps = kMveeDefaultEps;
  double tol = kDefaultNormTol;
};

MatrixFormat format_of(const GlobalOptions& g) { return parse_format(g.format); }

// Thrown by command bodies for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  Index d = 0;
  Index m = 0;
  Index k = 0;
  double delta = 0.0;
  std::vector<double> alpha;
  std::string out;
};

int cmd_synth(const SynthArgs& args, const GlobalOptions& g, std::ostream& out) {
  std::optional<std::vector<double>> alpha;
  if (!args.alpha.empty()) alpha = args.alpha;
  const SyntheticInstance inst = generate_instance(args.d, args.m, args.k, args.delta, g.seed, alpha);
  const MatrixFormat fmt = format_of(g);
  const fs::path dir(args.out);
  const std::string ext(extension(fmt));
  write_matrix(dir / ("A" + ext), inst.a, fmt);
  write_matrix(dir / ("F" + ext), inst.f, fmt);
  write_matrix(dir / ("H" + ext), inst.h, fmt);

  std::vector<Index> perm1(inst.permutation.size());
  for (Index c = 0; c < perm1.size(); ++c) perm1[c] = inst.permutation[c] + 1;
  json meta = {{"toolkit_version", kVersion},
               {"rng", kRngName},
               {"d", args.d},
               {"m", args.m},
               {"k", args.k},
               {"delta", inst.delta},
               {"sigma_k1_upper", inst.delta},
               {"seed", inst.seed},
               {"dirichlet_alpha", inst.dirichlet_alpha},
               {"f_attempts", inst.f_attempts},
               {"true_indices", inst.true_indices.one_based()},
               {"permutation", perm1},
               {"files", {{"A", "A" + ext}, {"F", "F" + ext}, {"H", "H" + ext}}},
               {"f_digest", digest(inst.f.data())},
               {"h_digest", digest(inst.h.data())}};
  json f_rows = json::array();
  for (Index i = 0; i < inst.f.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < inst.f.cols(); ++j) row.push_back(inst.f(i, j));
    f_rows.push_back(std::move(row));
  }
  meta["f"] = std::move(f_rows);
  write_json(dir / "meta.json", meta);
  out << "wrote " << (dir / ("A" + ext)).string() << " (" << args.d << "x" << args.m << ", k=" << args.k
      << ", delta=" << format_double(inst.delta) << ", true indices " << join(inst.true_indices.one_based())
      << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- approx

struct ApproxArgs {
  std::string input;
  Index k = 0;
  Index q = kDefaultPower;
  std::string method = "spa";
  Index oversample = 0;
  bool bounds = false;
  std::string report;
  std::string write_b;
};

int cmd_approx(const ApproxArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  ExperimentReport report;
  report.method = args.method;
  report.parameters.k = args.k;
  report.parameters.q = args.method == "svd" ? std::nullopt : std::optional<Index>(args.q);
  report.parameters.eps = g.tol;
  report.parameters.seed = g.seed;
  RunRecord rec;
  rec.seed = g.seed;
  int code = kExitOk;
  try {
    const Matrix a = read_matrix(args.input);
    report.parameters.d = a.rows();
    report.parameters.m = a.cols();
    RankKApprox r;
    if (args.method == "spa") {
      r = spa_rank_approx(a, args.k, args.q, g.tol);
    } else if (args.method == "rand") {
      r = rand_subspace_approx(a, args.k, args.q, args.oversample, g.seed, g.tol);
    } else {
      r = svd_rank_approx(a, args.k, g.tol);
    }
    const double norm_a = spectral_norm(a, g.tol);
    rec.abs_error = r.error2;
    rec.rel_error = norm_a > 0.0 ? r.error2 / norm_a : 0.0;
    rec.stages = r.timings;
    if (r.seed_indices) rec.indices = r.seed_indices->one_based();
    if (r.rank_collapsed) report.notes.push_back("subspace collapsed below rank k");
    if (args.bounds) {
      if (r.seed_indices) {
        report.bounds = bound_report(a, r);
      } else {
        report.notes.push_back("--bounds applies to method spa only");
      }
    }
    if (!args.write_b.empty()) write_matrix(args.write_b, r.b, format_of(g));
    out << args.method << ": abs_error " << format_double(*rec.abs_error) << " rel_error "
        << format_double(*rec.rel_error) << "\n";
  } catch (const Error& e) {
    rec.error = e.what();
    report.error = e.what();
    err << "error: " << e.what() << "\n";
    code = kExitComputation;
  }
  report.records.push_back(std::move(rec));
  finalize(report);
  write_json(args.report, to_json(report));
  return code;
}

// ---------------------------------------------------------------- select

struct SelectArgs {
  std::string input;
  Index k = 0;
  std::string method = "spa";
  std::optional<Index> q;
  double boundary_tol = kBoundaryTol;
  bool diagnostics = false;
  std::string truth;
  std::string out;
  // Batch mode.
  Index instances = 0;
  Index d = 0;
  Index m = 0;
  std::vector<double> deltas{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<std::string> methods;
  std::vector<Index> qs;
};

std::vector<std::string> selector_notes(const SelectorResult& r) {
  std::vector<std::string> notes = r.notes;
  if (r.candidates) notes.push_back("boundary candidates: " + std::to_string(*r.candidates));
  if (r.fallback) notes.push_back("fell back to SPA on the preconditioned points");
  return notes;
}

int cmd_select_single(const SelectArgs& args, const GlobalOptions& g, std::ostream& out,
                      std::ostream& err) {
  ExperimentReport report;
  report.method = args.method;
  report.parameters.k = args.k;
  report.parameters.eps = g.eps;
  report.parameters.seed = g.seed;
  const bool powered = args.method == "mpspa" || args.method == "merspa";
  SelectOptions o;
  o.eps = g.eps;
  o.boundary_tol = args.boundary_tol;
  o.diagnostics = args.diagnostics;
  if (powered) {
    o.q = args.q.value_or(kDefaultPower);
    report.parameters.q = o.q;
    if (!args.q) report.notes.push_back("q not given; using q = " + std::to_string(kDefaultPower));
  }
  RunRecord rec;
  rec.seed = g.seed;
  int code = kExitOk;
  try {
    const Matrix a = read_matrix(args.input);
    report.parameters.d = a.rows();
    report.parameters.m = a.cols();
    const SelectorResult r = run_selector(args.method, a, args.k, o);
    rec.indices = r.indices.one_based();
    rec.stages = r.timing;
    for (const std::string& n : selector_notes(r)) report.notes.push_back(n);
    if (r.diagnostics) report.bounds = *r.diagnostics;
    if (!args.truth.empty()) rec.recovery_rate = recovery_rate(r.indices, read_truth(args.truth));
    out << args.method << ": indices " << join(rec.indices);
    if (rec.recovery_rate) out << " recovery " << format_double(*rec.recovery_rate);
    out << "\n";
  } catch (const Error& e) {
    rec.error = e.what();
    report.error = e.what();
    err << "error: " << e.what() << "\n";
    code = kExitComputation;
  }
  report.records.push_back(std::move(rec));
  finalize(report);
  write_json(args.out, to_json(report));
  return code;
}

json sweep_json(const RecoverySweep& sweep) {
  json cells = json::array();
  for (const RecoveryCell& c : sweep.cells) {
    json j = to_json(c.report);
    j["delta_factor"] = c.factor;
    j["label"] = c.selector.label();
    cells.push_back(std::move(j));
  }
  return {{"sigma_star", sweep.sigma_star}, {"cells", std::move(cells)}};
}

int cmd_select_batch(const SelectArgs& args, const GlobalOptions& g, std::ostream& out) {
  NoiseGrid grid;
  grid.d = args.d;
  grid.m = args.m;
  grid.k = args.k;
  grid.factors = args.deltas;
  grid.instances = args.instances;
  grid.base_seed = g.seed;
  std::vector<std::string> methods = args.methods;
  if (methods.empty()) methods = selector_names();
  std::vector<Index> qs = args.qs;
  if (qs.empty()) qs = {kDefaultPower};
  const RecoverySweep sweep = run_recovery_sweep(grid, expand_cases(methods, qs), g.eps, g.jobs);
  const fs::path dir(args.out);
  write_file_atomic(dir / "select_batch.csv", recovery_sweep_csv(sweep));
  write_json(dir / "select_batch.json", sweep_json(sweep));
  out << "wrote " << (dir / "select_batch.csv").string() << " (" << sweep.cells.size()
      << " rows, sigma_star " << format_double(sweep.sigma_star) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- unmix

struct UnmixArgs {
  std::string input;
  std::string meta;
  Index k = 0;
  std::string method = "spa";
  std::optional<Index> q;
  std::string library;
  std::string drop_bands;
  std::string expect_match;
  bool rasters = false;
  std::string out;
};

Matrix drop_rows(const Matrix& a, const std::vector<Index>& keep) {
  Matrix out(keep.size(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < keep.size(); ++i) out(i, j) = a(keep[i], j);
  return out;
}

std::string sad_table_text(const Matrix& sad, const std::vector<Index>& indices) {
  std::ostringstream s;
  s << "SAD (radians) of each selected endmember against the library; * marks the row minimum\n";
  s << "endmember  pixel";
  for (Index j = 0; j < sad.cols(); ++j) s << "  lib_" << (j + 1);
  s << "\n";
  for (Index i = 0; i < sad.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < sad.cols(); ++j)
      if (sad(i, j) < sad(i, best)) best = j;
    s << "e" << (i + 1) << "  " << indices[i];
    for (Index j = 0; j < sad.cols(); ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f%s", sad(i, j), j == best ? "*" : "");
      s << "  " << buf;
    }
    s << "\n";
  }
  return s.str();
}

int cmd_unmix(const UnmixArgs& args, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const fs::path dir(args.out);
  ExperimentReport report;
  report.method = args.method;
  report.parameters.k = args.k;
  report.parameters.eps = g.eps;
  report.parameters.seed = g.seed;
  RunRecord rec;
  rec.seed = g.seed;
  int code = kExitOk;
  try {
    Matrix a = read_matrix(args.input);
    const Index original_bands = a.rows();
    std::optional<Index> height, width;
    std::vector<double> wavelengths;
    if (!args.meta.empty()) {
      const json meta = read_json(args.meta);
      if (meta.contains("height")) height = meta.at("height").get<Index>();
      if (meta.contains("width")) width = meta.at("width").get<Index>();
      if (meta.contains("bands") && meta.at("bands").get<Index>() != original_bands) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "sidecar says " + std::to_string(meta.at("bands").get<Index>()) + " bands, matrix has " +
                        std::to_string(original_bands));
      }
      if (meta.contains("wavelengths")) wavelengths = meta.at("wavelengths").get<std::vector<double>>();
      if (height && width && *height * *width != a.cols()) {
        throw Error(ErrorCode::kDimensionMismatch, "height x width does not match the pixel count");
      }
    }
    if (args.rasters && !(height && width)) {
      throw Error(ErrorCode::kMissingShape, "raster output needs height and width in the sidecar");
    }

    std::vector<Index> keep;
    const std::vector<Index> dropped =
        args.drop_bands.empty() ? std::vector<Index>{} : parse_index_ranges(args.drop_bands);
    for (Index b = 0; b < original_bands; ++b)
      if (!std::binary_search(dropped.begin(), dropped.end(), b)) keep.push_back(b);
    if (!dropped.empty()) {
      if (dropped.back() >= original_bands) {
        throw Error(ErrorCode::kBadShape, "--drop-bands names a band beyond " + std::to_string(original_bands));
      }
      a = drop_rows(a, keep);
      report.notes.push_back("dropped " + std::to_string(dropped.size()) + " bands");
    }
    report.parameters.d = a.rows();
    report.parameters.m = a.cols();

    SelectOptions o;
    o.eps = g.eps;
    if (args.q) {
      o.q = *args.q;
      report.parameters.q = *args.q;
    } else if (args.method == "mpspa" || args.method == "merspa") {
      report.parameters.q = o.q;
      report.notes.push_back("q not given; using q = " + std::to_string(kDefaultPower));
    }
    const SelectorResult sel = run_selector(args.method, a, args.k, o);
    rec.indices = sel.indices.one_based();
    rec.stages = sel.timing;
    for (const std::string& n : selector_notes(sel)) report.notes.push_back(n);

    const Matrix endmembers = select_columns(a, sel.indices.view());
    std::string em = "band";
    for (Index j = 0; j < args.k; ++j) em += ",endmember_" + std::to_string(j + 1);
    em += "\n";
    for (Index i = 0; i < endmembers.rows(); ++i) {
      em += wavelengths.size() == original_bands ? format_double(wavelengths[keep[i]])
                                                  : std::to_string(keep[i] + 1);
      for (Index j = 0; j < args.k; ++j) em += "," + format_double(endmembers(i, j));
      em += "\n";
    }
    write_file_atomic(dir / "endmembers.csv", em);

    AbundanceResult abundances;
    {
      ScopedStage t(rec.stages, "abundance");
      abundances = estimate_abundances(endmembers, a);
    }
    const MatrixFormat wfmt = format_of(g) == MatrixFormat::kMtx ? MatrixFormat::kCsv : format_of(g);
    write_matrix(dir / ("W" + std::string(extension(wfmt))), abundances.w, wfmt);

    if (!args.library.empty()) {
      Matrix lib = read_matrix(args.library);
      if (lib.rows() == original_bands && !dropped.empty()) lib = drop_rows(lib, keep);
      if (lib.rows() != a.rows()) {
        throw Error(ErrorCode::kDimensionMismatch, "library has " + std::to_string(lib.rows()) +
                                                       " bands, data has " + std::to_string(a.rows()));
      }
      Matrix sad(args.k, lib.cols());
      std::string csv = "endmember,pixel";
      for (Index j = 0; j < lib.cols(); ++j) csv += ",lib_" + std::to_string(j + 1);
      csv += ",argmin\n";
      for (Index i = 0; i < args.k; ++i) {
        Index best = 0;
        for (Index j = 0; j < lib.cols(); ++j) {
          sad(i, j) = spectral_angle_distance(lib.col(j), endmembers.col(i));
          if (sad(i, j) < sad(i, best)) best = j;
        }
        csv += std::to_string(i + 1) + "," + std::to_string(rec.indices[i]);
        for (Index j = 0; j < lib.cols(); ++j) csv += "," + format_double(sad(i, j));
        csv += "," + std::to_string(best + 1) + "\n";
      }
      write_file_atomic(dir / "sad.csv", csv);
      write_file_atomic(dir / "sad.txt", sad_table_text(sad, rec.indices));
    }

    if (height && width) {
      for (Index j = 0; j < args.k; ++j) {
        std::vector<double> row(a.cols());
        for (Index p = 0; p < a.cols(); ++p) row[p] = abundances.w(j, p);
        write_file_atomic(dir / ("abundance_" + std::to_string(j + 1) + ".pgm"),
                          encode_pgm(row, *height, *width));
      }
    }

    out << args.method << ": endmember pixels " << join(rec.indices) << "\n";
    if (!args.expect_match.empty()) {
      SelectOptions other = o;
      other.q = kDefaultPower;
      const SelectorResult ref = run_selector(args.expect_match, a, args.k, other);
      const bool match = ref.indices.sorted() == sel.indices.sorted();
      report.notes.push_back(std::string(match ? "matches " : "differs from ") + args.expect_match + " (" +
                             join(ref.indices.one_based()) + ")");
      out << (match ? "match: " : "mismatch: ") << args.expect_match << " selected "
          << join(ref.indices.one_based()) << "\n";
      if (!match) code = kExitMismatch;
    }
  } catch (const Error& e) {
    rec.error = e.what();
    report.error = e.what();
    err << "error: " << e.what() << "\n";
    code = kExitComputation;
  }
  report.records.push_back(std::move(rec));
  finalize(report);
  write_json(dir / "report.json", to_json(report));
  return code;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string suite;
  std::string scale = "desk";
  std::optional<Index> repetitions;
  std::string out;
};

json approx_json(const ApproxSweep& sweep) {
  json cells = json::array();
  for (const ApproxCell& c : sweep.cells) {
    json j = to_json(c.report);
    j["delta_factor"] = c.factor;
    cells.push_back(std::move(j));
  }
  return {{"sigma_star", sweep.sigma_star}, {"cells", std::move(cells)}};
}

json timing_json(const std::vector<TimingRow>& rows) {
  json out = json::array();
  for (const TimingRow& r : rows) {
    json j = {{"d", r.shape.d},
              {"m", r.shape.m},
              {"k", r.shape.k},
              {"q", r.q},
              {"delta", r.delta},
              {"seed", r.seed},
              {"repetitions", r.repetitions},
              {"spa_rel_error", r.spa_rel_error},
              {"svd_rel_error", r.svd_rel_error},
              {"stages", {{"spa_seconds", r.spa_seconds}, {"svd_seconds", r.svd_seconds}}}};
    if (r.error) j["error"] = *r.error;
    out.push_back(std::move(j));
  }
  return out;
}

bool cell_ok(const ExperimentReport& r) {
  return std::any_of(r.records.begin(), r.records.end(), [](const RunRecord& x) { return !x.error; });
}

int cmd_bench(const BenchArgs& args, const GlobalOptions& g, std::ostream& out) {
  const Scale scale = parse_scale(args.scale);
  const fs::path dir(args.out);
  const bool all = args.suite == "all";
  Index succeeded = 0;
  std::ostringstream summary;
  summary << "sepnmf " << kVersion << " bench " << args.suite << " scale " << args.scale << " base seed "
          << g.seed << " rng " << kRngName << "\n";

  if (all || args.suite == "fig1") {
    const NoiseGrid grid = figure_grid(scale, g.seed);
    const ApproxSweep sweep = run_approx_sweep(grid, fig1_powers(), g.jobs);
    write_file_atomic(dir / "fig1.csv", approx_sweep_csv(sweep));
    write_json(dir / "fig1.json", approx_json(sweep));
    summary << "\nfig1: spa_rank_approx on (" << grid.d << ", " << grid.m << ", " << grid.k << "), "
            << grid.instances << " instances per cell, sigma_star " << format_double(sweep.sigma_star) << "\n";
    summary << "  delta/sigma*  q  mean_abs_error  delta\n";
    for (const ApproxCell& c : sweep.cells) {
      succeeded += cell_ok(c.report) ? 1 : 0;
      const auto it = c.report.aggregates.find("abs_error");
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %11.2f  %2zu  %14.6g  %.6g\n", c.factor, c.q,
                    it == c.report.aggregates.end() ? NAN : it->second.mean, c.delta);
      summary << buf;
    }
  }
  if (all || args.suite == "fig2") {
    const NoiseGrid grid = figure_grid(scale, g.seed);
    const RecoverySweep sweep = run_recovery_sweep(grid, fig2_cases(scale), g.eps, g.jobs);
    write_file_atomic(dir / "fig2.csv", recovery_sweep_csv(sweep));
    write_json(dir / "fig2.json", sweep_json(sweep));
    summary << "\nfig2: recovery on (" << grid.d << ", " << grid.m << ", " << grid.k << "), " << grid.instances
            << " instances per cell, sigma_star " << format_double(sweep.sigma_star) << "\n";
    summary << "  delta/sigma*  method          mean_recovery\n";
    for (const RecoveryCell& c : sweep.cells) {
      succeeded += cell_ok(c.report) ? 1 : 0;
      const auto it = c.report.aggregates.find("recovery_rate");
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %11.2f  %-14s  %13.4f\n", c.factor, c.selector.label().c_str(),
                    it == c.report.aggregates.end() ? NAN : it->second.mean);
      summary << buf;
    }
  }
  if (all || args.suite == "tab2") {
    const Index reps = args.repetitions.value_or(scale == Scale::kDesk ? 3 : 1);
    std::vector<TimingRow> rows;
    Index i = 0;
    for (const TimingShape& s : tab2_shapes(scale)) {
      rows.push_back(run_timing_case(s, kDefaultPower, derive_seed(g.seed, i++), reps));
    }
    write_file_atomic(dir / "tab2.csv", timing_csv(rows));
    write_json(dir / "tab2.json", timing_json(rows));
    summary << "\ntab2: spa_rank_approx(q=" << kDefaultPower << ") against the truncated SVD\n";
    for (const TimingRow& r : rows) {
      if (r.error) {
        summary << "  (" << r.shape.d << ", " << r.shape.m << "): error " << *r.error << "\n";
        continue;
      }
      ++succeeded;
      char buf[200];
      std::snprintf(buf, sizeof buf, "  (%zu, %zu, %zu)  rel error spa %.6g svd %.6g\n", r.shape.d, r.shape.m,
                    r.shape.k, r.spa_rel_error, r.svd_rel_error);
      summary << buf;
      std::snprintf(buf, sizeof buf, "  (%zu, %zu, %zu)  time spa %.4fs svd %.4fs\n", r.shape.d, r.shape.m,
                    r.shape.k, r.spa_seconds, r.svd_seconds);
      summary << buf;
    }
  }
  write_file_atomic(dir / "summary.txt", summary.str());
  out << summary.str();
  return succeeded > 0 ? kExitOk : kExitBench;
}

}  // namespace

// ---------------------------------------------------------------- helpers

LoadedInstance load_instance(const fs::path& dir) {
  const json meta = read_json(dir / "meta.json");
  LoadedInstance inst;
  try {
    inst.a = read_matrix(dir / meta.at("files").at("A").get<std::string>());
    inst.f = read_matrix(dir / meta.at("files").at("F").get<std::string>());
    inst.h = read_matrix(dir / meta.at("files").at("H").get<std::string>());
    inst.delta = meta.at("delta").get<double>();
    inst.seed = meta.at("seed").get<std::uint64_t>();
    for (Index p : meta.at("permutation").get<std::vector<Index>>()) inst.permutation.push_back(p - 1);
    std::vector<Index> truth;
    for (Index p : meta.at("true_indices").get<std::vector<Index>>()) truth.push_back(p - 1);
    inst.true_indices = IndexSet(std::move(truth));
    if (digest(inst.h.data()) != meta.at("h_digest").get<std::string>()) {
      throw Error(ErrorCode::kParse, "H does not match its digest");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed meta.json: ") + e.what());
  }
  const Index k = inst.f.cols();
  const Index m = inst.a.cols();
  if (inst.permutation.size() != m || inst.h.rows() != k || inst.h.cols() + k != m) {
    throw Error(ErrorCode::kParse, "instance files have inconsistent shapes");
  }
  Matrix sep(inst.a.rows(), m);
  for (Index c = 0; c < m; ++c) {
    auto dst = sep.col(inst.permutation[c]);
    if (c < k) {
      std::copy(inst.f.col(c).begin(), inst.f.col(c).end(), dst.begin());
    } else {
      for (Index r = 0; r < inst.a.rows(); ++r) {
        double v = 0.0;
        for (Index j = 0; j < k; ++j) v += inst.f(r, j) * inst.h(j, c - k);
        dst[r] = v;
      }
    }
  }
  const Matrix noise = inst.a - sep;
  if (inst.delta == 0.0) {
    if (max_abs(noise) > 1e-12) throw Error(ErrorCode::kParse, "noiseless instance does not reconstruct");
  } else if (std::abs(spectral_norm(noise, 1e-10) - inst.delta) > 1e-8 * inst.delta) {
    throw Error(ErrorCode::kParse, "noise norm does not match delta");
  }
  return inst;
}

IndexSet read_truth(const fs::path& path) {
  if (path.extension() == ".json") {
    const json meta = read_json(path);
    if (!meta.contains("true_indices")) throw Error(ErrorCode::kParse, path.string() + " has no true_indices");
    std::vector<Index> truth;
    for (Index p : meta.at("true_indices").get<std::vector<Index>>()) {
      if (p == 0) throw Error(ErrorCode::kParse, "true_indices are 1-based");
      truth.push_back(p - 1);
    }
    return IndexSet(std::move(truth));
  }
  std::string text = read_file(path);
  for (char& c : text)
    if (c == '\n' || c == '\r' || c == ' ' || c == '\t') c = ',';
  std::string cleaned;
  for (char c : text)
    if (c != ',' || (!cleaned.empty() && cleaned.back() != ',')) cleaned += c;
  while (!cleaned.empty() && cleaned.back() == ',') cleaned.pop_back();
  return IndexSet(parse_index_ranges(cleaned));
}

std::string encode_pgm(std::span<const double> values, Index height, Index width) {
  if (values.size() != height * width) {
    throw Error(ErrorCode::kDimensionMismatch, "raster has the wrong pixel count");
  }
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (double v : values) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * c))));
  }
  return out;
}

// ---------------------------------------------------------------- run

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Separable NMF toolkit: SPA variants, rank-k approximation, MVEE preconditioning", "sepnmf"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Concurrent instances in batch runs (0 = all cores)")->capture_default_str();
  app.add_option("--format", g.format, "Matrix output format")
      ->check(CLI::IsMember({"mtx", "bin", "csv"}))
      ->capture_default_str();
  app.add_option("--eps", g.eps, "MVEE tolerance")->capture_default_str();
  app.add_option("--tol", g.tol, "Spectral norm tolerance")->capture_default_str();

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "Generate a noisy separable instance");
  s->add_option("-d", synth.d, "Rows")->required()->check(CLI::PositiveNumber);
  s->add_option("-m", synth.m, "Columns")->required()->check(CLI::PositiveNumber);
  s->add_option("-k", synth.k, "Factorization rank")->required()->check(CLI::PositiveNumber);
  s->add_option("--delta", synth.delta, "Spectral norm of the noise")->check(CLI::NonNegativeNumber);
  s->add_option("--alpha", synth.alpha, "Dirichlet parameters (k values in (0, 1])")->delimiter(',');
  s->add_option("-o,--out", synth.out, "Output directory")->required();

  ApproxArgs approx;
  CLI::App* a = app.add_subcommand("approx", "Rank-k approximation with error report");
  a->add_option("-i,--input", approx.input, "Matrix file")->required()->check(CLI::ExistingFile);
  a->add_option("-k", approx.k, "Rank")->required()->check(CLI::PositiveNumber);
  a->add_option("-q,--q", approx.q, "Power iterations")->capture_default_str();
  a->add_option("--method", approx.method, "Approximator")
      ->check(CLI::IsMember({"spa", "rand", "svd"}))
      ->capture_default_str();
  a->add_option("--oversample", approx.oversample, "Extra Gaussian columns (method rand)");
  a->add_flag("--bounds", approx.bounds, "Attach the bound diagnostics (method spa)");
  a->add_option("--write-b", approx.write_b, "Write the approximation B");
  a->add_option("-o,--report", approx.report, "Report JSON path")->required();

  SelectArgs sel;
  CLI::App* c = app.add_subcommand("select", "Endmember selection, single matrix or seeded batch");
  c->add_option("-i,--input", sel.input, "Matrix file")->check(CLI::ExistingFile);
  c->add_option("-k", sel.k, "Number of columns to select")->required()->check(CLI::PositiveNumber);
  c->add_option("--method", sel.method, "Selector")->check(CLI::IsMember(selector_names()))->capture_default_str();
  c->add_option("-q,--q", sel.q, "Power iterations for mpspa/merspa (default 10)");
  c->add_option("--boundary-tol", sel.boundary_tol, "ER boundary tolerance")->capture_default_str();
  c->add_flag("--diagnostics", sel.diagnostics, "Attach bound diagnostics (mpspa)");
  c->add_option("--truth", sel.truth, "meta.json or list of true 1-based indices")->check(CLI::ExistingFile);
  c->add_option("-o,--out", sel.out, "Report JSON path, or output directory in batch mode")->required();
  c->add_option("--instances", sel.instances, "Batch mode: instances per noise level");
  c->add_option("-d", sel.d, "Batch mode: rows");
  c->add_option("-m", sel.m, "Batch mode: columns");
  c->add_option("--deltas", sel.deltas, "Batch mode: noise levels as multiples of sigma*")->delimiter(',');
  c->add_option("--methods", sel.methods, "Batch mode: selectors")->delimiter(',');
  c->add_option("--qs", sel.qs, "Batch mode: powers for mpspa/merspa")->delimiter(',');

  UnmixArgs unmix;
  CLI::App* u = app.add_subcommand("unmix", "Select endmembers and estimate abundances");
  u->add_option("-i,--input", unmix.input, "Bands x pixels matrix")->required()->check(CLI::ExistingFile);
  u->add_option("--meta", unmix.meta, "Sidecar JSON (height, width, bands, wavelengths)")
      ->check(CLI::ExistingFile);
  u->add_option("-k", unmix.k, "Number of endmembers")->required()->check(CLI::PositiveNumber);
  u->add_option("--method", unmix.method, "Selector")->check(CLI::IsMember(selector_names()))->capture_default_str();
  u->add_option("-q,--q", unmix.q, "Power iterations for mpspa/merspa (default 10)");
  u->add_option("--library", unmix.library, "Reference spectra, bands x r")->check(CLI::ExistingFile);
  u->add_option("--drop-bands", unmix.drop_bands, "1-based bands to remove, e.g. 1-4,76");
  u->add_option("--expect-match", unmix.expect_match, "Exit 1 unless this selector picks the same set")
      ->check(CLI::IsMember(selector_names()));
  u->add_flag("--rasters", unmix.rasters, "Require PGM abundance rasters");
  u->add_option("-o,--out", unmix.out, "Output directory")->required();

  BenchArgs bench;
  CLI::App* b = app.add_subcommand("bench", "Seeded experiment suites: error sweep, recovery sweep, timing table");
  b->add_option("suite", bench.suite, "fig1 | fig2 | tab2 | all")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "tab2", "all"}));
  b->add_option("--scale", bench.scale, "desk | smoke")
      ->check(CLI::IsMember({"desk", "smoke"}))
      ->capture_default_str();
  b->add_option("--repetitions", bench.repetitions, "Timing repetitions for tab2");
  b->add_option("-o,--out", bench.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
    if (c->parsed() && sel.instances > 0) {
      if (sel.d == 0 || sel.m == 0) throw UsageError("batch mode needs -d and -m");
    } else if (c->parsed() && sel.input.empty()) {
      throw UsageError("select needs -i or --instances");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << c->help();
    return kExitUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, g, out);
    if (a->parsed()) return cmd_approx(approx, g, out, err);
    if (c->parsed()) return sel.instances > 0 ? cmd_select_batch(sel, g, out) : cmd_select_single(sel, g, out, err);
    if (u->parsed()) return cmd_unmix(unmix, g, out, err);
    if (b->parsed()) return cmd_bench(bench, g, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return b->parsed() ? kExitBench : kExitComputation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return b->parsed() ? kExitBench : kExitComputation;
  }
  return kExitUsage;
}

}  // namespace sepnmf::cli
