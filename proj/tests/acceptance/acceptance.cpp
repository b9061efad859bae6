// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "sepnmf/cli/experiments.hpp"
#include "sepnmf/cli/files.hpp"
#include "sepnmf/cli/matrix_io.hpp"
#include "sepnmf/cli/report.hpp"
#include "sepnmf/error.hpp"
#include "sepnmf/linalg.hpp"
#include "sepnmf/lowrank.hpp"
#include "sepnmf/metrics.hpp"
#include "sepnmf/mvee.hpp"
#include "sepnmf/random.hpp"
#include "sepnmf/select.hpp"
#include "sepnmf/spa.hpp"
#include "sepnmf/synth.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace sepnmf;

namespace {

constexpr std::uint64_t kBaseSeed = 20240;

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 8) failures.push_back(what);
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome zero_noise_exactness() {
  struct Shape {
    Index d, m, k;
  };
  struct Config {
    std::string method;
    Index q;
  };
  const std::vector<Config> configs{{"spa", 0},   {"pspa", 0},  {"mpspa", 0},     {"mpspa", 1}, {"mpspa", 10},
                                    {"erspa", 0}, {"merspa", 10}, {"prewhiten", 0}, {"spaspa", 0}};
  Outcome o;
  Index runs = 0;
  for (const Shape& s : {Shape{10, 80, 3}, Shape{30, 400, 5}, Shape{50, 1000, 8}}) {
    for (Index i = 0; i < 100; ++i) {
      const SyntheticInstance inst = generate_instance(s.d, s.m, s.k, 0.0, derive_seed(kBaseSeed + 1, i));
      for (const Config& c : configs) {
        ++runs;
        const std::string tag = c.method + "(q=" + std::to_string(c.q) + ") on (" + std::to_string(s.d) + "," +
                                std::to_string(s.m) + "," + std::to_string(s.k) + ") instance " + std::to_string(i);
        try {
          SelectOptions opt;
          opt.q = c.q;
          const SelectorResult r = run_selector(c.method, inst.a, s.k, opt);
          o.check(recovery_rate(r.indices, inst.true_indices) == 1.0, tag + " missed a vertex");
        } catch (const Error& e) {
          o.check(false, tag + " threw " + e.what());
        }
      }
    }
  }
  o.detail = std::to_string(runs) + " selector runs";
  return o;
}

// ---------------------------------------------------------------- 2, 3

// Diagnostics recomputed through Eigen for one run.
struct OracleBounds {
  double sigma_k = 0.0, sigma_k1 = 0.0, sigma_min_ai = 0.0, g1_min = 0.0, g2_max = 0.0;
  double achieved = 0.0, residual_sq_bound = 0.0;
  Index rank_b = 0;
};

OracleBounds oracle_bounds(const Matrix& a, const RankKApprox& r, Index k, Index q) {
  OracleBounds ob;
  const Eigen::MatrixXd ae = oracle::to_eigen(a);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ae, Eigen::ComputeThinU);
  const Eigen::VectorXd s = svd.singularValues();
  ob.sigma_k = s(k - 1);
  ob.sigma_k1 = s(k);
  const Eigen::MatrixXd ai = oracle::to_eigen(select_columns(a, r.seed_indices->view()));
  ob.sigma_min_ai = ai.jacobiSvd().singularValues()(k - 1);
  const Eigen::MatrixXd g = svd.matrixU().transpose() * ai;
  const Eigen::MatrixXd g1 = g.topRows(k);
  const Eigen::MatrixXd g2 = g.bottomRows(g.rows() - k);
  ob.g1_min = g1.jacobiSvd().singularValues()(k - 1);
  ob.g2_max = g2.jacobiSvd().singularValues()(0);
  ob.achieved = oracle::spectral_norm(a - r.b);
  // H S1 = S2^{2q} G2 G1^{-1} S1^{1-2q}.
  const Eigen::MatrixXd x = g1.transpose().partialPivLu().solve(g2.transpose()).transpose();
  Eigen::MatrixXd hs1 = x;
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < static_cast<Index>(x.rows()); ++i)
      hs1(i, j) *= s(j) * std::pow(s(k + i) / s(j), 2.0 * static_cast<double>(q));
  const double h = hs1.jacobiSvd().singularValues()(0);
  ob.residual_sq_bound = h * h + ob.sigma_k1 * ob.sigma_k1;
  const Eigen::VectorXd sb = oracle::to_eigen(r.b).jacobiSvd().singularValues();
  for (Index i = 0; i < static_cast<Index>(sb.size()); ++i) ob.rank_b += sb(i) > 1e-10 * sb(0) ? 1 : 0;
  return ob;
}

bool agrees(double impl, double ref, double scale) { return std::abs(impl - ref) <= 1e-8 * scale; }

struct BoundBatch {
  Outcome rank_k;
  Outcome diagnostics;
};

BoundBatch bound_suite() {
  BoundBatch out;
  const double fractions[] = {0.25, 0.5, 0.75, 1.0};
  Index runs = 0;
  double worst_ratio = 0.0;
  for (Index i = 0; i < 200; ++i) {
    const std::uint64_t seed = derive_seed(kBaseSeed + 2, i);
    const SyntheticInstance probe = generate_instance(30, 400, 5, 0.0, seed);
    const double limit = spa_noise_limit(probe.f);
    const SyntheticInstance inst = generate_instance(30, 400, 5, fractions[i % 4] * limit, seed);
    const double sigma_f = singular_values(inst.f).back();
    for (Index q : {1, 2, 5}) {
      ++runs;
      const std::string tag = "instance " + std::to_string(i) + " q=" + std::to_string(q);
      RankKApprox r;
      BoundReport b;
      try {
        r = spa_rank_approx(inst.a, 5, q);
        b = bound_report(inst.a, r);
      } catch (const Error& e) {
        out.rank_k.check(false, tag + " threw " + e.what());
        out.diagnostics.check(false, tag + " threw " + e.what());
        continue;
      }
      const OracleBounds ob = oracle_bounds(inst.a, r, 5, q);
      const double eb = ob.sigma_k1 * std::sqrt(1.0 + std::pow(ob.sigma_k1 / ob.sigma_k, 4.0 * q - 2.0) / 20164.0);
      out.rank_k.check(ob.achieved < eb + 1e-10, tag + ": error " + num(ob.achieved) + " >= bound " + num(eb));
      out.rank_k.check(ob.rank_b == 5, tag + ": rank(B) = " + std::to_string(ob.rank_b));
      out.rank_k.check(ob.achieved < 1.00003 * ob.sigma_k1 + 1e-10,
                        tag + ": error / sigma_k+1 = " + num(ob.achieved / ob.sigma_k1));
      worst_ratio = std::max(worst_ratio, ob.achieved / ob.sigma_k1);
      const double na = oracle::spectral_norm(inst.a);
      out.rank_k.check(agrees(b.theorem4_bound, eb, na) && agrees(b.achieved_error, ob.achieved, na) &&
                            b.rank_b == ob.rank_b,
                        tag + ": reported bound fields disagree with the oracle");

      out.diagnostics.check(ob.g2_max <= ob.sigma_k1 + 1e-10,
                            tag + ": g2_max " + num(ob.g2_max) + " > sigma_k+1 " + num(ob.sigma_k1));
      out.diagnostics.check(ob.g1_min >= std::max(0.0, ob.sigma_min_ai - ob.sigma_k1) - 1e-10,
                            tag + ": g1_min " + num(ob.g1_min) + " below the margin");
      out.diagnostics.check(ob.sigma_min_ai - ob.sigma_k1 > rho_floor(sigma_f),
                            tag + ": rho " + num(ob.sigma_min_ai - ob.sigma_k1) + " <= floor " +
                                num(rho_floor(sigma_f)));
      out.diagnostics.check(ob.achieved * ob.achieved <= ob.residual_sq_bound + 1e-8,
                            tag + ": error^2 " + num(ob.achieved * ob.achieved) + " > residual bound " +
                                num(ob.residual_sq_bound));
      out.diagnostics.check(agrees(b.g1_min, ob.g1_min, na) && agrees(b.g2_max, ob.g2_max, na) &&
                                agrees(b.rho, ob.sigma_min_ai - ob.sigma_k1, na) && b.lemma6_rhs &&
                                std::abs(*b.lemma6_rhs - ob.residual_sq_bound) <= 1e-6 * ob.residual_sq_bound,
                            tag + ": reported diagnostics disagree with the oracle");
    }
  }
  out.rank_k.detail = std::to_string(runs) + " runs, max error/sigma_k+1 = " + num(worst_ratio);
  out.diagnostics.detail = std::to_string(runs) + " runs";
  return out;
}

// ---------------------------------------------------------------- 4

Outcome fig1_trend() {
  Outcome o;
  const cli::NoiseGrid grid = cli::figure_grid(cli::Scale::kDesk, kBaseSeed + 4);
  const cli::ApproxSweep sweep = cli::run_approx_sweep(grid, cli::fig1_powers(), jobs());
  // Scale for the delta = 0 cells, where the error is pure round-off.
  double norm_scale = 0.0;
  for (Index i = 0; i < grid.instances; ++i) {
    const SyntheticInstance inst = generate_instance(grid.d, grid.m, grid.k, 0.0, cli::instance_seed(grid, i));
    norm_scale = std::max(norm_scale, spectral_norm(inst.a));
  }
  const double floor = 1e-10 * norm_scale;
  std::map<double, std::map<Index, double>> mean;
  for (const cli::ApproxCell& c : sweep.cells) {
    for (const cli::RunRecord& r : c.report.records)
      o.check(!r.error, "delta " + num(c.delta) + " q=" + std::to_string(c.q) + ": " + r.error.value_or(""));
    mean[c.delta][c.q] = c.report.aggregates.at("abs_error").mean;
  }
  double worst_q10 = 0.0;
  for (const auto& [delta, by_q] : mean) {
    const double e10 = by_q.at(10);
    o.check(e10 <= 1.25 * delta + floor, "delta " + num(delta) + ": q=10 mean error " + num(e10));
    if (delta > 0) worst_q10 = std::max(worst_q10, e10 / delta);
    const std::vector<Index>& qs = cli::fig1_powers();
    for (Index j = 1; j < qs.size(); ++j) {
      const double prev = by_q.at(qs[j - 1]);
      const double next = by_q.at(qs[j]);
      o.check(next <= 1.01 * prev + floor, "delta " + num(delta) + ": mean error rises from " + num(prev) +
                                               " (q=" + std::to_string(qs[j - 1]) + ") to " + num(next) +
                                               " (q=" + std::to_string(qs[j]) + ")");
    }
  }
  o.detail = std::to_string(sweep.cells.size()) + " cells of " + std::to_string(grid.instances) +
             " instances, sigma* = " + num(sweep.sigma_star) + ", max q=10 error/delta = " + num(worst_q10);
  return o;
}

// ---------------------------------------------------------------- 5

Outcome fig2_trend() {
  Outcome o;
  const cli::NoiseGrid grid = cli::figure_grid(cli::Scale::kDesk, kBaseSeed + 5);
  std::vector<cli::SelectCase> cases = cli::expand_cases({"spa", "pspa"}, {});
  for (const cli::SelectCase& c : cli::expand_cases({"mpspa"}, {1, 15})) cases.push_back(c);
  const cli::RecoverySweep sweep = cli::run_recovery_sweep(grid, cases, kMveeDefaultEps, jobs());
  std::map<double, std::map<std::string, double>> mean;
  for (const cli::RecoveryCell& c : sweep.cells) {
    for (const cli::RunRecord& r : c.report.records)
      o.check(!r.error, c.selector.label() + " at delta " + num(c.delta) + ": " + r.error.value_or(""));
    const auto it = c.report.aggregates.find("recovery_rate");
    mean[c.delta][c.selector.label()] = it == c.report.aggregates.end() ? 0.0 : it->second.mean;
  }
  double gap = 0.0;
  double pspa_gain = 0.0;
  double lowest_spa = 1.0;
  for (const auto& [delta, m] : mean) {
    if (delta > 0) {
      o.check(m.at("mpspa(q=15)") >= m.at("mpspa(q=1)"),
              "delta " + num(delta) + ": mpspa q=15 " + num(m.at("mpspa(q=15)")) + " < q=1 " +
                  num(m.at("mpspa(q=1)")));
    }
    o.check(m.at("pspa") >= m.at("spa") - 0.02,
            "delta " + num(delta) + ": pspa " + num(m.at("pspa")) + " < spa " + num(m.at("spa")));
    gap += std::abs(m.at("mpspa(q=15)") - m.at("pspa"));
    lowest_spa = std::min(lowest_spa, m.at("spa"));
    pspa_gain += m.at("pspa") - m.at("spa");
  }
  gap /= static_cast<double>(mean.size());
  pspa_gain /= static_cast<double>(mean.size());
  o.check(gap <= 0.05, "mean |mpspa(q=15) - pspa| = " + num(gap));
  o.detail = "sigma* = " + num(sweep.sigma_star) + ", mean |mpspa(q=15) - pspa| = " + num(gap) +
             ", mean pspa - spa = " + num(pspa_gain) + ", lowest spa mean recovery = " + num(lowest_spa);
  return o;
}

// ---------------------------------------------------------------- 6

Outcome tab2_ordering() {
  Outcome o;
  const cli::TimingRow r = cli::run_timing_case({100, 20000, 10}, 10, derive_seed(kBaseSeed + 6, 0), 3);
  if (r.error) {
    o.check(false, *r.error);
    return o;
  }
  const double ratio = std::max(r.spa_rel_error, r.svd_rel_error) / std::min(r.spa_rel_error, r.svd_rel_error);
  o.check(r.spa_seconds < r.svd_seconds,
          "spa " + num(r.spa_seconds) + "s is not faster than svd " + num(r.svd_seconds) + "s");
  o.check(ratio <= 1.03, "rel error ratio " + num(ratio));
  o.detail = "spa " + num(r.spa_seconds) + "s vs svd " + num(r.svd_seconds) + "s, rel errors " +
             num(r.spa_rel_error) + " / " + num(r.svd_rel_error);
  return o;
}

// ---------------------------------------------------------------- 7

Outcome mvee_certificates() {
  Outcome o;
  double worst_dual = 0.0;
  double worst_logdet = 0.0;
  for (Index i = 0; i < 100; ++i) {
    const Index k = 2 + i % 5;
    const Index m = 20 + (i * 37) % 181;
    const Matrix p = testutil::gaussian(k, m, derive_seed(kBaseSeed + 7, i));
    const std::string tag = "set " + std::to_string(i) + " (k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")";
    Ellipsoid e;
    try {
      e = solve_mvee(p);
    } catch (const Error& err) {
      o.check(false, tag + " threw " + err.what());
      continue;
    }
    const Eigen::MatrixXd pe = oracle::to_eigen(p);
    const Eigen::MatrixXd le = oracle::to_eigen(e.l);
    double feas = 0.0;
    for (Index c = 0; c < m; ++c) feas = std::max(feas, pe.col(c).dot(le * pe.col(c)));
    o.check(feas <= 1.0 + 1e-6, tag + ": max p^T L p = " + num(feas));
    const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(e.weights.data(), m);
    const Eigen::MatrixXd dual = (pe * u.asDiagonal() * pe.transpose()).inverse() / static_cast<double>(k);
    const double norm_l = le.jacobiSvd().singularValues()(0);
    const double dual_gap = (le - dual).jacobiSvd().singularValues()(0) / norm_l;
    worst_dual = std::max(worst_dual, dual_gap);
    o.check(dual_gap <= 1e-8, tag + ": dual identity off by " + num(dual_gap));
    const oracle::MveeReference ref = oracle::mvee(p, 1e-10);
    const double logdet_gap = std::abs(std::log(le.determinant()) - ref.log_det);
    worst_logdet = std::max(worst_logdet, logdet_gap / (static_cast<double>(k) * std::log1p(1e-6)));
    o.check(logdet_gap <= static_cast<double>(k) * std::log1p(1e-6), tag + ": log det gap " + num(logdet_gap));
  }
  o.detail = "100 point sets, worst dual gap " + num(worst_dual) + ", worst log det gap / allowance " +
             num(worst_logdet);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome oracle_equivalences() {
  Outcome o;
  for (Index i = 0; i < 100; ++i) {
    const Matrix a = testutil::gaussian(10, 50, derive_seed(kBaseSeed + 81, i));
    const Index k = 1 + i % 8;
    const IndexSet fast = spa_select(a, k);
    o.check(std::vector<Index>(fast.begin(), fast.end()) == oracle::naive_spa(a, k),
            "SPA sequence differs from the projector oracle, case " + std::to_string(i));
  }
  double worst_proj = 0.0;
  for (Index i = 0; i < 50; ++i) {
    const Matrix a = testutil::gaussian(12, 60, derive_seed(kBaseSeed + 82, i));
    const Index q = i % 4;
    const RankKApprox r = spa_rank_approx(a, 4, q);
    Matrix y = select_columns(a, r.seed_indices->view());
    const Matrix aat = gram_of_rows(a);
    for (Index j = 0; j < q; ++j) y = aat * y;
    const double gap = oracle::spectral_norm(r.b - oracle::projector_approx(y, a)) / oracle::spectral_norm(a);
    worst_proj = std::max(worst_proj, gap);
    o.check(gap <= 1e-8, "spa_rank_approx vs explicit projector, case " + std::to_string(i) + ": " + num(gap));
  }
  double worst_svd = 0.0;
  for (Index i = 0; i < 100; ++i) {
    const Index d = 5 + i % 11;
    const Index m = 8 + (i * 7) % 40;
    const Index k = 1 + i % std::min<Index>(d - 1, m - 1);
    const Matrix a = testutil::gaussian(d, m, derive_seed(kBaseSeed + 83, i));
    const SvdResult t = svd_truncated(a, k);
    Matrix us = t.u;
    for (Index j = 0; j < k; ++j)
      for (Index r = 0; r < d; ++r) us(r, j) *= t.s[j];
    const double residual = oracle::spectral_norm(a - times_transpose(us, t.v));
    const double sk1 = oracle::singular_values(a)[k];
    const double gap = std::abs(residual - sk1) / sk1;
    worst_svd = std::max(worst_svd, gap);
    o.check(gap <= 1e-8, "svd_truncated residual vs sigma_k+1, case " + std::to_string(i) + ": " + num(gap));
  }
  double worst_w = 0.0;
  for (Index i = 0; i < 50; ++i) {
    const Index k = 2 + i % 5;
    const Matrix f = testutil::uniform(10, k, derive_seed(kBaseSeed + 84, i));
    const Matrix a = 2.0 * testutil::gaussian(10, 1, derive_seed(kBaseSeed + 85, i));
    const AbundanceResult r = estimate_abundances(f, a);
    const std::vector<double> ref = oracle::simplex_least_squares(f, std::vector<double>(a.col(0).begin(), a.col(0).end()));
    for (Index j = 0; j < k; ++j) worst_w = std::max(worst_w, std::abs(r.w(j, 0) - ref[j]));
  }
  o.check(worst_w <= 1e-6, "abundance solver vs exhaustive support oracle: " + num(worst_w));
  o.detail = "worst gaps: projector " + num(worst_proj) + ", svd residual " + num(worst_svd) + ", abundances " +
             num(worst_w);
  return o;
}

// ---------------------------------------------------------------- 9

std::string strip_timing_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  std::vector<bool> keep;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    if (header) {
      for (const std::string& f : fields) keep.push_back(!(f.size() >= 8 && f.ends_with("_seconds")));
      header = false;
    }
    for (Index i = 0; i < fields.size(); ++i)
      if (i >= keep.size() || keep[i]) out += fields[i] + ",";
    out += "\n";
  }
  return out;
}

std::string strip_timing_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("time") == std::string::npos) out += line + "\n";
  return out;
}

// Compares two output trees with timing fields removed.
void compare_trees(const fs::path& a, const fs::path& b, const std::string& tag, Outcome& o) {
  std::set<fs::path> names;
  for (const fs::path& root : {a, b}) {
    if (!fs::exists(root)) continue;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root));
  }
  for (const fs::path& rel : names) {
    const fs::path pa = a / rel;
    const fs::path pb = b / rel;
    if (!fs::exists(pa) || !fs::exists(pb)) {
      o.check(false, tag + ": " + rel.string() + " written by only one run");
      continue;
    }
    const std::string ext = rel.extension().string();
    bool same = false;
    if (ext == ".json") {
      same = cli::without_timing(cli::read_json(pa)) == cli::without_timing(cli::read_json(pb));
    } else if (ext == ".csv") {
      same = strip_timing_columns(cli::read_file(pa)) == strip_timing_columns(cli::read_file(pb));
    } else if (ext == ".txt") {
      same = strip_timing_lines(cli::read_file(pa)) == strip_timing_lines(cli::read_file(pb));
    } else {
      same = cli::read_file(pa) == cli::read_file(pb);
    }
    o.check(same, tag + ": " + rel.string() + " differs between runs");
  }
}

Outcome cli_determinism() {
  Outcome o;
  const fs::path work = fs::temp_directory_path() / ("sepnmf_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string exe = SEPNMF_CLI_PATH;
  const auto sh = [](const std::string& s) { return "'" + s + "'"; };

  // Inputs shared by the commands under test.
  const std::string inst = (work / "inst").string();
  if (std::system((sh(exe) + " --seed 5 synth -d 30 -m 100 -k 4 --delta 0.05 -o " + sh(inst) + " > /dev/null").c_str()) !=
      0) {
    o.check(false, "could not create the input instance");
    return o;
  }
  cli::write_file_atomic(work / "side.json", R"({"height": 10, "width": 10, "bands": 30})");

  struct Command {
    std::string name;
    std::string args;  // "{out}" is replaced by the output directory
  };
  const std::string a = sh(inst + "/A.mtx");
  const std::vector<Command> commands{
      {"synth-mtx", "--seed 9 synth -d 20 -m 200 -k 4 --delta 1.5 -o {out}"},
      {"synth-bin", "--seed 9 --format bin synth -d 20 -m 200 -k 4 --delta 0.3 -o {out}"},
      {"synth-csv", "--seed 9 --format csv synth -d 12 -m 50 -k 3 -o {out}"},
      {"approx-spa", "approx -i " + a + " -k 4 -q 3 --bounds --write-b {out}/B.mtx -o {out}/r.json"},
      {"approx-rand", "--seed 4 approx -i " + a + " -k 4 -q 2 --method rand --oversample 3 -o {out}/r.json"},
      {"approx-svd", "approx -i " + a + " -k 4 --method svd -o {out}/r.json"},
      {"select-mpspa", "select -i " + a + " -k 4 --method mpspa --diagnostics --truth " + sh(inst + "/meta.json") +
                           " -o {out}/r.json"},
      {"select-merspa", "select -i " + a + " -k 4 --method merspa -q 3 -o {out}/r.json"},
      {"select-batch", "--seed 3 --jobs 2 select -k 4 --instances 3 -d 20 -m 150 --deltas 0,0.5,1 -o {out}"},
      {"unmix", "unmix -i " + a + " --meta " + sh((work / "side.json").string()) + " -k 4 --library " +
                    sh(inst + "/F.mtx") + " --method mpspa -q 4 --expect-match pspa -o {out}"},
      {"bench", "--seed 2 --jobs 2 bench all --scale smoke -o {out}"},
  };
  for (const Command& c : commands) {
    const fs::path out = work / c.name;
    std::string args = c.args;
    for (std::size_t pos; (pos = args.find("{out}")) != std::string::npos;) args.replace(pos, 5, out.string());
    const std::string cmd = sh(exe) + " " + args;
    std::string first_stdout;
    for (int run = 0; run < 2; ++run) {
      fs::remove_all(out);
      fs::create_directories(out);
      const fs::path log = work / (c.name + ".stdout");
      const int status = std::system((cmd + " > " + sh(log.string()) + " 2>&1").c_str());
      o.check(status == 0, c.name + ": exit status " + std::to_string(status));
      const std::string text = strip_timing_lines(cli::read_file(log));
      if (run == 0) {
        first_stdout = text;
        fs::rename(out, work / (c.name + ".first"));
      } else {
        o.check(text == first_stdout, c.name + ": stdout differs between runs");
        compare_trees(work / (c.name + ".first"), out, c.name, o);
      }
    }
  }
  fs::remove_all(work);
  o.detail = std::to_string(commands.size()) + " commands run twice";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto want = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };

  bool all_pass = true;
  const auto report = [&](int n, const char* name, const Outcome& o, double seconds) {
    all_pass = all_pass && o.pass;
    std::printf("criterion %d %s: %s (%s; %.1fs)\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds);
    for (const std::string& f : o.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
  };
  const auto timed = [&](int n, const char* name, const std::function<Outcome()>& body) {
    if (!want(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.check(false, std::string("unexpected exception: ") + e.what());
    }
    report(n, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };

  timed(1, "zero-noise exactness", zero_noise_exactness);
  if (want(2) || want(3)) {
    const auto t0 = std::chrono::steady_clock::now();
    BoundBatch b;
    try {
      b = bound_suite();
    } catch (const std::exception& e) {
      b.rank_k.check(false, std::string("unexpected exception: ") + e.what());
      b.diagnostics.check(false, std::string("unexpected exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (want(2)) report(2, "rank-k bound suite", b.rank_k, s);
    if (want(3)) report(3, "bound diagnostics", b.diagnostics, s);
  }
  timed(4, "approximation error trend", fig1_trend);
  timed(5, "recovery trend", fig2_trend);
  timed(6, "spa vs svd timing order", tab2_ordering);
  timed(7, "MVEE certificates", mvee_certificates);
  timed(8, "oracle equivalences", oracle_equivalences);
  timed(9, "CLI determinism", cli_determinism);
  return all_pass ? 0 : 1;
}
