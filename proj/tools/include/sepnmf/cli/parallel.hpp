#pragma once

#include <functional>

#include "sepnmf/matrix.hpp"

namespace sepnmf::cli {

// Runs body(i) for every i in [0, n) on up to `jobs` threads (0 means one per
// hardware thread). Work is handed out by an atomic counter; results must be
// stored by index so the outcome is independent of scheduling. The exception
// of the lowest failing index is rethrown after all workers join.
void parallel_for(Index n, unsigned jobs, const std::function<void(Index)>& body);

}  // namespace sepnmf::cli
