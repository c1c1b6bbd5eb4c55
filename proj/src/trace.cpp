#include "sparsevr/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <ostream>

namespace sparsevr {

double passes_to_target(const Trace& trace, double target) {
  for (const auto& r : trace)
    if (r.suboptimality <= target) return r.effective_passes;
  return std::numeric_limits<double>::infinity();
}

double seconds_to_target(const Trace& trace, double target) {
  for (const auto& r : trace)
    if (r.suboptimality <= target) return r.wall_time_s;
  return std::numeric_limits<double>::infinity();
}

void write_trace_csv(std::ostream& out, const Trace& trace,
                     std::optional<double> sweep_value, bool write_header) {
  if (write_header) {
    out << "restart,epoch,effective_passes,wall_time_s,suboptimality";
    if (sweep_value) out << ",sweep_value";
    out << '\n';
  }
  char buf[192];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf), "%" PRId64 ",%" PRId64 ",%.17g,%.6f,%.17g",
                  r.restart, r.epoch, r.effective_passes, r.wall_time_s,
                  r.suboptimality);
    out << buf;
    if (sweep_value) {
      std::snprintf(buf, sizeof(buf), ",%.17g", *sweep_value);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace sparsevr
