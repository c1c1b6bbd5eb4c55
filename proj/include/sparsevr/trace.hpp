#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

namespace sparsevr {

// One convergence-curve row. `epoch` counts completed epochs within the
// current restart (0 = the initial point).
struct TraceRecord {
  std::int64_t restart = 0;
  std::int64_t epoch = 0;
  double effective_passes = 0.0;
  double wall_time_s = 0.0;
  double suboptimality = 0.0;
};

using Trace = std::vector<TraceRecord>;

// First effective-pass count at which the trace reaches `target`;
// +inf when never reached.
double passes_to_target(const Trace& trace, double target);
double seconds_to_target(const Trace& trace, double target);

// Header: restart,epoch,effective_passes,wall_time_s,suboptimality with
// optional sweep_value column appended. All columns except wall_time_s are
// byte-deterministic for a fixed config, seed and a single thread.
void write_trace_csv(std::ostream& out, const Trace& trace,
                     std::optional<double> sweep_value = {},
                     bool write_header = true);

}  // namespace sparsevr
