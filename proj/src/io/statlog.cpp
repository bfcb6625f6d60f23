#include <array>
#include "sshmc/io/statlog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sshmc/error.hpp"
#include "sshmc/rng.hpp"

namespace sshmc::io {

namespace {

constexpr std::size_t kRows = 1000;
constexpr std::size_t kCols = 21;
constexpr std::size_t kPurposeCol = 3;  // attribute 4, 0-based column

double token_value(const std::string& tok, std::size_t row) {
  if (!tok.empty() && (tok[0] == 'A' || tok[0] == 'a')) {
    const std::string digits = tok.substr(1);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(),
                     [](unsigned char c) { return std::isdigit(c); }))
      throw DataFormatError("statlog: bad categorical code '" + tok + "'",
                            row);
    return std::stod(digits);
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataFormatError("statlog: bad numeric token '" + tok + "'", row);
  }
}

}  // namespace

models::HblrData load_statlog(const std::string& path, StatlogInfo* info) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("statlog: cannot open " + path);

  std::vector<std::array<double, 20>> features;
  std::vector<std::string> purpose;
  std::vector<int> labels;
  features.reserve(kRows);

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);
    if (toks.size() != kCols)
      throw DataFormatError("statlog: expected 21 columns, got " +
                                std::to_string(toks.size()),
                            row);
    std::array<double, 20> feat{};
    for (std::size_t c = 0; c < 20; ++c) feat[c] = token_value(toks[c], row);
    const std::string& label_tok = toks[20];
    if (label_tok != "1" && label_tok != "2")
      throw DataFormatError("statlog: label must be 1 or 2, got '" +
                                label_tok + "'",
                            row);
    features.push_back(feat);
    purpose.push_back(toks[kPurposeCol]);
    labels.push_back(label_tok == "1" ? 1 : -1);
  }
  if (row != kRows)
    throw DataFormatError("statlog: expected 1000 rows, got " +
                          std::to_string(row));

  // Standardize all 20 columns over the full file.
  for (std::size_t c = 0; c < 20; ++c) {
    double mean = 0.0;
    for (const auto& f : features) mean += f[c];
    mean /= static_cast<double>(kRows);
    double var = 0.0;
    for (const auto& f : features) var += (f[c] - mean) * (f[c] - mean);
    var /= static_cast<double>(kRows);
    const double sd = std::sqrt(var);
    if (sd == 0.0)
      throw DataFormatError("statlog: column " + std::to_string(c + 1) +
                            " is constant");
    for (auto& f : features) f[c] = (f[c] - mean) / sd;
  }

  // Partition by purpose code, groups ordered by code string.
  std::map<std::string, std::vector<std::size_t>> by_code;
  for (std::size_t r = 0; r < kRows; ++r) by_code[purpose[r]].push_back(r);

  models::HblrData data;
  if (info) {
    info->purpose_codes.clear();
    info->group_sizes.clear();
  }
  for (const auto& [code, rows] : by_code) {
    models::HblrGroup g;
    g.rows = rows.size();
    g.d = 20;
    g.x.resize(g.rows * 20);
    g.y.resize(g.rows);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      for (std::size_t c = 0; c < 20; ++c)
        g.x[j * 20 + c] = features[rows[j]][c];
      g.y[j] = labels[rows[j]];
    }
    data.groups.push_back(std::move(g));
    data.group_names.push_back(code);
    if (info) {
      info->purpose_codes.push_back(code);
      info->group_sizes.push_back(rows.size());
    }
  }
  // The published partition has sizes from 9 to 285; a different spread is
  // worth a note but not an error.
  std::size_t min_size = kRows, max_size = 0;
  for (const auto& [code, rows_idx] : by_code) {
    min_size = std::min(min_size, rows_idx.size());
    max_size = std::max(max_size, rows_idx.size());
  }
  if (min_size + 3 < 9 || min_size > 12 || max_size + 30 < 285 ||
      max_size > 315)
    std::fprintf(stderr,
                 "statlog: note: purpose group sizes span %zu..%zu "
                 "(published partition spans 9..285)\n",
                 min_size, max_size);
  return data;
}

void write_synthetic_statlog(const std::string& path, std::uint64_t seed) {
  // Purpose codes with the published partition sizes (min 9, max 280).
  const std::vector<std::pair<std::string, std::size_t>> purposes = {
      {"A40", 234}, {"A41", 103}, {"A410", 12}, {"A42", 181}, {"A43", 280},
      {"A44", 12},  {"A45", 22},  {"A46", 50},  {"A48", 9},   {"A49", 97}};
  struct Cat {
    std::size_t col;
    int base;
    int count;
  };
  // Categorical columns and their code alphabets (A<base>..A<base+count-1>).
  const std::vector<Cat> cats = {{0, 11, 4},  {2, 30, 5},  {5, 61, 5},
                                 {6, 71, 5},  {8, 91, 4},  {9, 101, 3},
                                 {11, 121, 4}, {13, 141, 3}, {14, 151, 3},
                                 {16, 171, 4}, {18, 191, 2}, {19, 201, 2}};
  struct Num {
    std::size_t col;
    double lo, hi;
  };
  const std::vector<Num> nums = {{1, 4, 72},    {4, 250, 18424}, {7, 1, 4},
                                 {10, 1, 4},    {12, 19, 75},    {15, 1, 4},
                                 {17, 1, 2}};

  RngStream rng(seed);
  std::ostringstream out;
  // Per-purpose logistic weights over the numeric columns, so the labels
  // carry real group-level signal for the hierarchical model to find.
  std::map<std::string, std::vector<double>> w_by_code;
  for (const auto& [code, _] : purposes) {
    std::vector<double> w(nums.size());
    for (auto& v : w) v = 0.8 * rng.normal();
    w_by_code[code] = w;
  }

  std::vector<std::string> rows;
  rows.reserve(kRows);
  for (const auto& [code, count] : purposes) {
    for (std::size_t r = 0; r < count; ++r) {
      std::vector<std::string> toks(kCols);
      toks[kPurposeCol] = code;
      for (const auto& c : cats)
        toks[c.col] =
            "A" + std::to_string(c.base +
                                 static_cast<int>(rng.uniform() * c.count));
      double z = 0.0;
      for (std::size_t k = 0; k < nums.size(); ++k) {
        const auto& nspec = nums[k];
        const double raw =
            nspec.lo + (nspec.hi - nspec.lo) * rng.uniform();
        const double rounded = std::round(raw);
        toks[nspec.col] = std::to_string(static_cast<long>(rounded));
        // Roughly standardized contribution to the label model.
        z += w_by_code[code][k] *
             ((rounded - 0.5 * (nspec.lo + nspec.hi)) /
              (0.3 * (nspec.hi - nspec.lo)));
      }
      const double p = 1.0 / (1.0 + std::exp(-z));
      toks[20] = rng.uniform() < p ? "1" : "2";
      std::string line;
      for (std::size_t c = 0; c < kCols; ++c) {
        line += toks[c];
        if (c + 1 < kCols) line += " ";
      }
      rows.push_back(line);
    }
  }
  // Interleave rows deterministically so group order is not file order.
  for (std::size_t i = rows.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
    std::swap(rows[i - 1], rows[j]);
  }
  for (const auto& r : rows) out << r << "\n";

  std::ofstream f(path);
  if (!f) throw DataFormatError("statlog: cannot write " + path);
  f << out.str();
  if (!f) throw DataFormatError("statlog: write failed for " + path);
}

std::string resolve_statlog_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("SSHMC_DATA_DIR"))
    return std::string(dir) + "/german.data";
  return "";
}

}  // namespace sshmc::io
