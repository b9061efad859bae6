#pragma once

#include <filesystem>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sepnmf/matrix.hpp"
#include "sepnmf/spa.hpp"

namespace sepnmf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMismatch = 1;  // unmix --expect-match disagreement
inline constexpr int kExitUsage = 2;
inline constexpr int kExitComputation = 3;
inline constexpr int kExitBench = 4;

// Entry point of the sepnmf tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Instance written by `synth`, read back with its consistency checks: the H
// digest must match, and A - F[I, H]P must vanish (delta = 0, within 1e-12
// elementwise) or have spectral norm delta (within 1e-8 relative).
struct LoadedInstance {
  Matrix a;
  Matrix f;
  Matrix h;
  std::vector<Index> permutation;  // 0-based
  IndexSet true_indices;           // 0-based
  double delta = 0.0;
  std::uint64_t seed = 0;
};

LoadedInstance load_instance(const std::filesystem::path& dir);

// Reads ground-truth indices from a synth meta.json or from a text list of
// 1-based indices and ranges ("3,7,10-12"). Returns 0-based indices.
IndexSet read_truth(const std::filesystem::path& path);

// Binary PGM (P5), 8 bits; 255 is abundance 1, values clamped to [0, 1].
// Pixels are laid out row-major: pixel p is row p / width, column p % width.
std::string encode_pgm(std::span<const double> values, Index height, Index width);

}  // namespace sepnmf::cli
