#pragma once

#include <string>

#include "sshmc/models/hblr.hpp"

namespace sshmc::io {

// Loader for the Statlog German credit file: whitespace-separated, 1000
// rows x 21 columns, final column in {1, 2} mapped to {+1, -1}. Categorical
// codes 'A<digits>' become their numeric suffix; all 20 feature columns are
// standardized to zero mean / unit variance over the full file; records are
// partitioned into groups by attribute 4 (purpose), sorted by code.
struct StatlogInfo {
  std::vector<std::string> purpose_codes;
  std::vector<std::size_t> group_sizes;
};

models::HblrData load_statlog(const std::string& path,
                              StatlogInfo* info = nullptr);

// Synthetic stand-in with the real file's shape: 1000 rows, 21 columns,
// the ten observed purpose codes with their published group sizes (9..280),
// plausible categorical alphabets and numeric ranges, labels drawn from a
// per-group logistic model. Deterministic in the seed.
void write_synthetic_statlog(const std::string& path, std::uint64_t seed);

// Resolve the dataset path: explicit path if nonempty, else
// $SSHMC_DATA_DIR/german.data, else empty.
std::string resolve_statlog_path(const std::string& explicit_path);

}  // namespace sshmc::io
