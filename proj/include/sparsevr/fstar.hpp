#pragma once

#include <string>
#include <vector>

#include "sparsevr/objective.hpp"

namespace sparsevr {

struct FStarResult {
  double fstar = 0.0;
  std::vector<double> x_star;  // empty on a cache hit
  bool from_cache = false;
  bool converged = false;  // gradient norm reached 1e-10
  std::string warning;
};

// Runs the accelerated serial solver (safe-L schedule, fixed seed) until the
// gradient norm drops below 1e-10 or the pass budget runs out, and returns
// the minimum observed objective value. Results are cached in a text file of
// append-only `dataset_hash mu fstar` lines keyed by (dataset hash, mu);
// repeated calls return bit-identical values. Requires mu > 0.
FStarResult estimate_fstar(const Problem& p, double budget_passes,
                           const std::string& cache_path = "");

}  // namespace sparsevr
