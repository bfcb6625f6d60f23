#include "sshmc/io/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sshmc/error.hpp"

namespace sshmc::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class AtomicFile {
 public:
  explicit AtomicFile(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".tmp"), out_(tmp_) {
    if (!out_) throw DataFormatError("cannot open " + tmp_ + " for writing");
  }
  ~AtomicFile() {
    if (!committed_) std::remove(tmp_.c_str());
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw DataFormatError("write failed for " + tmp_);
    out_.close();
    if (std::rename(tmp_.c_str(), path_.c_str()) != 0)
      throw DataFormatError("rename failed for " + path_);
    committed_ = true;
  }

 private:
  std::string path_, tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_comments(std::ofstream& out,
                    const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << "\n";
}

}  // namespace

Histogram emit_histogram(const ChainTrace& trace, const std::string& column,
                         int bins) {
  if (bins < 2) throw std::invalid_argument("histogram: bins must be >= 2");
  const auto it = std::find(trace.column_names.begin(),
                            trace.column_names.end(), column);
  if (it == trace.column_names.end())
    throw std::invalid_argument("histogram: unknown column '" + column + "'");
  const auto col =
      trace.column(static_cast<std::size_t>(it - trace.column_names.begin()));

  const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
  double lo = *lo_it, hi = *hi_it;
  Histogram h;
  if (hi - lo < 1e-300) {
    // Constant-like column: one bin carrying all the mass.
    h.edges = {lo - 0.5, lo + 0.5};
    h.masses = {1.0};
    return h;
  }
  h.edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
  h.masses.assign(bins, 0.0);
  const double inv_width = bins / (hi - lo);
  const double unit = 1.0 / static_cast<double>(col.size());
  for (double x : col) {
    int b = static_cast<int>((x - lo) * inv_width);
    if (b >= bins) b = bins - 1;
    if (b < 0) b = 0;
    h.masses[b] += unit;
  }
  return h;
}

void write_trace_csv(const std::string& path, const ChainTrace& trace,
                     const std::vector<std::string>& comments) {
  AtomicFile file(path);
  auto& out = file.stream();
  write_comments(out, comments);
  for (std::size_t j = 0; j < trace.column_names.size(); ++j)
    out << trace.column_names[j] << ",";
  out << "H_before,H_after,accepted\n";
  // Per-retained-row Hamiltonian records come from the iteration that
  // produced the row.
  for (std::size_t i = 0; i < trace.retained; ++i) {
    const std::size_t iter =
        trace.burn_in + (i + 1) * trace.thin - 1;  // 0-based iteration
    for (std::size_t j = 0; j < trace.dim; ++j)
      out << fmt(trace.samples[i * trace.dim + j]) << ",";
    out << fmt(trace.h_before[iter]) << "," << fmt(trace.h_after[iter]) << ","
        << fmt(trace.accepted[iter]) << "\n";
  }
  file.commit();
}

void write_energy_csv(const std::string& path, const ChainTrace& trace,
                      const std::vector<std::string>& comments) {
  AtomicFile file(path);
  auto& out = file.stream();
  write_comments(out, comments);
  out << "iteration,H_before,H_after,accepted\n";
  for (std::size_t t = 0; t < trace.h_before.size(); ++t)
    out << (t + 1) << "," << fmt(trace.h_before[t]) << ","
        << fmt(trace.h_after[t]) << "," << fmt(trace.accepted[t]) << "\n";
  file.commit();
}

void write_histogram_csv(const std::string& path, const Histogram& hist,
                         const std::vector<std::string>& comments) {
  AtomicFile file(path);
  auto& out = file.stream();
  write_comments(out, comments);
  out << "bin_lo,bin_hi,mass\n";
  for (std::size_t b = 0; b < hist.masses.size(); ++b)
    out << fmt(hist.edges[b]) << "," << fmt(hist.edges[b + 1]) << ","
        << fmt(hist.masses[b]) << "\n";
  file.commit();
}

void write_summary_text(
    const std::string& path, const std::vector<std::string>& comments,
    const std::vector<std::pair<std::string, std::string>>& fields) {
  AtomicFile file(path);
  auto& out = file.stream();
  write_comments(out, comments);
  for (const auto& [k, v] : fields) out << k << " = " << v << "\n";
  file.commit();
}

LoadedTrace read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open " + path);
  LoadedTrace t;
  std::string line;
  std::size_t row_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    // Trailing empty cell from a separator-terminated header row.
    while (!cells.empty() && cells.back().empty()) cells.pop_back();
    if (!have_header) {
      t.columns = cells;
      t.data.resize(cells.size());
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw DataFormatError("csv: wrong cell count", row_no);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      try {
        t.data[j].push_back(std::stod(cells[j]));
      } catch (const std::exception&) {
        throw DataFormatError("csv: bad number '" + cells[j] + "'", row_no);
      }
    }
  }
  if (!have_header) throw DataFormatError("csv: no header in " + path);
  return t;
}

}  // namespace sshmc::io
