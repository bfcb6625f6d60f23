#pragma once

#include <string>
#include <vector>

#include "sshmc/diagnostics.hpp"
#include "sshmc/sample.hpp"

namespace sshmc::io {

struct Histogram {
  std::vector<double> edges;   // bins + 1, monotone
  std::vector<double> masses;  // bins, sums to 1
};

// Normalized histogram of one trace column. A zero-width column collapses
// to a single unit-mass bin around the value.
Histogram emit_histogram(const ChainTrace& trace, const std::string& column,
                         int bins);

// All writers are atomic (write to <path>.tmp, then rename) and prefix the
// file with the given '#' comment lines.
void write_trace_csv(const std::string& path, const ChainTrace& trace,
                     const std::vector<std::string>& comments);
void write_energy_csv(const std::string& path, const ChainTrace& trace,
                      const std::vector<std::string>& comments);
void write_histogram_csv(const std::string& path, const Histogram& hist,
                         const std::vector<std::string>& comments);
void write_summary_text(const std::string& path,
                        const std::vector<std::string>& comments,
                        const std::vector<std::pair<std::string, std::string>>&
                            fields);

// Read back a trace CSV produced by write_trace_csv (comments skipped).
struct LoadedTrace {
  std::vector<std::string> columns;  // includes H_before, H_after, accepted
  std::vector<std::vector<double>> data;  // column-major
};
LoadedTrace read_csv(const std::string& path);

}  // namespace sshmc::io
