#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sepnmf/cli/report.hpp"
#include "sepnmf/matrix.hpp"
#include "sepnmf/mvee.hpp"

namespace sepnmf::cli {

enum class Scale { kSmoke, kDesk };

Scale parse_scale(std::string_view name);

// Instances of one shape swept over noise levels delta = factor * sigma_star,
// where sigma_star is the median sigma_min(F) over the instance seeds. The
// same seeds are reused at every level, so F, H and the permutation are
// shared across a row of the grid and only the noise scale changes.
struct NoiseGrid {
  Index d = 0;
  Index m = 0;
  Index k = 0;
  std::vector<double> factors;
  Index instances = 0;
  std::uint64_t base_seed = 0;
};

NoiseGrid figure_grid(Scale scale, std::uint64_t base_seed);
std::uint64_t instance_seed(const NoiseGrid& grid, Index i);
double calibrate_sigma_star(const NoiseGrid& grid, unsigned jobs);

const std::vector<Index>& fig1_powers();

struct ApproxCell {
  double factor = 0.0;
  double delta = 0.0;
  Index q = 0;
  ExperimentReport report;  // one record per instance
};

struct ApproxSweep {
  double sigma_star = 0.0;
  std::vector<ApproxCell> cells;  // factor-major, then q
};

ApproxSweep run_approx_sweep(const NoiseGrid& grid, const std::vector<Index>& powers, unsigned jobs);

struct SelectCase {
  std::string method;
  std::optional<Index> q;  // set for mpspa and merspa

  std::string label() const;
};

std::vector<SelectCase> fig2_cases(Scale scale);
// Expands method names against powers: mpspa/merspa get one case per q.
std::vector<SelectCase> expand_cases(const std::vector<std::string>& methods,
                                     const std::vector<Index>& powers);

struct RecoveryCell {
  double factor = 0.0;
  double delta = 0.0;
  SelectCase selector;
  ExperimentReport report;  // one record per instance
};

struct RecoverySweep {
  double sigma_star = 0.0;
  std::vector<RecoveryCell> cells;  // factor-major, then case
};

RecoverySweep run_recovery_sweep(const NoiseGrid& grid, const std::vector<SelectCase>& cases,
                                 double eps, unsigned jobs);

struct TimingShape {
  Index d = 0;
  Index m = 0;
  Index k = 0;
};

std::vector<TimingShape> tab2_shapes(Scale scale);

struct TimingRow {
  TimingShape shape;
  Index q = 0;
  double delta = 0.0;  // half of sigma_min(F)
  std::uint64_t seed = 0;
  Index repetitions = 0;
  double spa_seconds = 0.0;  // best of the repetitions, error evaluation excluded
  double svd_seconds = 0.0;
  double spa_rel_error = 0.0;
  double svd_rel_error = 0.0;
  std::optional<std::string> error;
};

TimingRow run_timing_case(const TimingShape& shape, Index q, std::uint64_t seed, Index repetitions);

// CSV bodies. Columns ending in _seconds carry wall-clock time.
std::string approx_sweep_csv(const ApproxSweep& sweep);
std::string recovery_sweep_csv(const RecoverySweep& sweep);
std::string timing_csv(const std::vector<TimingRow>& rows);

}  // namespace sepnmf::cli
