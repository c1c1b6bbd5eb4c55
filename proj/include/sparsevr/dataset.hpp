#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsevr {

// Error raised for malformed input files; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::int64_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : msg),
        line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

// Row-compressed sparse design matrix with labels in {-1, +1}.
// Column indices are 0-based, strictly increasing within a row, and no zero
// value is ever stored. Immutable after construction; safe to share
// read-only across threads.
struct SparseDataset {
  std::int64_t n = 0;
  std::int64_t d = 0;
  std::vector<std::int64_t> row_ptr;  // size n+1
  std::vector<std::int32_t> col_idx;  // size nnz
  std::vector<double> values;         // size nnz
  std::vector<double> labels;         // size n, each -1 or +1

  struct RowView {
    std::span<const std::int32_t> idx;
    std::span<const double> val;
    std::size_t size() const { return idx.size(); }
  };

  RowView row(std::int64_t i) const {
    const auto b = static_cast<std::size_t>(row_ptr[i]);
    const auto e = static_cast<std::size_t>(row_ptr[i + 1]);
    return {std::span(col_idx).subspan(b, e - b),
            std::span(values).subspan(b, e - b)};
  }

  std::int64_t nnz() const { return row_ptr.empty() ? 0 : row_ptr.back(); }
  double density() const {
    return n > 0 && d > 0
               ? static_cast<double>(nnz()) / (static_cast<double>(n) * d)
               : 0.0;
  }
};

// Per-coordinate support statistics of a dataset after compaction:
// counts[v] = |{i : v in T_i}| >= 1, d_diag[v] = n / counts[v] and
// delta = max_v counts[v] / n. The remap records how compaction moved
// the original coordinate ids.
struct SupportProfile {
  std::vector<std::int64_t> counts;
  std::vector<double> d_diag;
  double delta = 0.0;
  std::int64_t original_d = 0;
  std::vector<std::int32_t> old_to_new;  // -1 for removed coordinates
  std::vector<std::int32_t> new_to_old;
};

// Parses LIBSVM text: `label idx:val idx:val ...` with 1-based ascending
// indices. Labels <= 0 map to -1, positive to +1; more than two distinct raw
// labels is an error. d defaults to (max index + 1) unless d_override > 0.
SparseDataset parse_libsvm(std::istream& in, std::int64_t d_override = 0);
SparseDataset load_libsvm(const std::string& path, std::int64_t d_override = 0);

// Serializes back to LIBSVM text with round-trip-exact values.
void write_libsvm(const SparseDataset& ds, std::ostream& out);

// Scales every row to unit Euclidean norm. Throws on an all-zero row.
SparseDataset normalize_rows(const SparseDataset& ds);

// Removes coordinates that appear in no support, records the remap, and
// computes counts, D and delta on the surviving coordinates.
std::pair<SparseDataset, SupportProfile> compute_support_profile(
    const SparseDataset& ds);

// Identity design matrix with labels i.i.d. uniform on {-1,+1}.
SparseDataset gen_synthetic(std::int64_t n, std::uint64_t seed);

// Random sparse rows: nnz_per_row distinct coordinates per row with values
// uniform in [-1,1)\{0}, random labels. Utility for benchmarks and tests.
SparseDataset gen_random_sparse(std::int64_t n, std::int64_t d,
                                std::int64_t nnz_per_row, std::uint64_t seed);

// FNV-1a over the full data model; used as the f* cache key.
std::uint64_t dataset_hash(const SparseDataset& ds);

// Versioned little-endian binary cache, round-trip exact.
void save_cache(const SparseDataset& ds, const std::string& path);
SparseDataset load_cache(const std::string& path);

}  // namespace sparsevr
