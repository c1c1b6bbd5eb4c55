#include "sparsevr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sparsevr/rng.hpp"

namespace sparsevr {

namespace {

void validate(const SparseDataset& ds) {
  if (ds.n == 0) throw ParseError("empty dataset", 0);
  if (ds.labels.size() != static_cast<std::size_t>(ds.n) ||
      ds.row_ptr.size() != static_cast<std::size_t>(ds.n) + 1) {
    throw std::invalid_argument("inconsistent dataset shape");
  }
}

}  // namespace

SparseDataset parse_libsvm(std::istream& in, std::int64_t d_override) {
  SparseDataset ds;
  ds.row_ptr.push_back(0);
  std::string line;
  std::int64_t line_no = 0;
  std::int64_t max_idx = -1;
  std::vector<double> raw_labels_seen;

  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments and skip blank lines.
    if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
    const char* p = line.c_str();
    while (*p == ' ' || *p == '\t') ++p;
    if (*p == '\0' || *p == '\r') continue;

    char* end = nullptr;
    const double raw_label = std::strtod(p, &end);
    if (end == p) throw ParseError("cannot parse label", line_no);
    p = end;

    bool known = false;
    for (double v : raw_labels_seen) known = known || v == raw_label;
    if (!known) {
      raw_labels_seen.push_back(raw_label);
      if (raw_labels_seen.size() > 2)
        throw ParseError("more than two distinct labels", line_no);
    }
    ds.labels.push_back(raw_label <= 0.0 ? -1.0 : +1.0);

    std::int64_t prev_idx = -1;
    while (true) {
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == '\0' || *p == '\r' || *p == '\n') break;
      const long long one_based = std::strtoll(p, &end, 10);
      if (end == p || *end != ':')
        throw ParseError("expected idx:val pair", line_no);
      if (one_based < 1) throw ParseError("index must be >= 1", line_no);
      p = end + 1;
      const double value = std::strtod(p, &end);
      if (end == p) throw ParseError("cannot parse value", line_no);
      p = end;

      const std::int64_t idx = one_based - 1;
      if (idx <= prev_idx) throw ParseError("non-ascending indices", line_no);
      prev_idx = idx;
      if (value == 0.0) continue;  // never store explicit zeros
      ds.col_idx.push_back(static_cast<std::int32_t>(idx));
      ds.values.push_back(value);
      max_idx = std::max(max_idx, idx);
    }
    ds.row_ptr.push_back(static_cast<std::int64_t>(ds.col_idx.size()));
  }

  ds.n = static_cast<std::int64_t>(ds.labels.size());
  if (ds.n == 0) throw ParseError("empty dataset", 0);
  ds.d = max_idx + 1;
  if (d_override > 0) {
    if (max_idx >= d_override)
      throw ParseError("index " + std::to_string(max_idx + 1) +
                           " exceeds requested dimension",
                       0);
    ds.d = d_override;
  }
  validate(ds);
  return ds;
}

SparseDataset load_libsvm(const std::string& path, std::int64_t d_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return parse_libsvm(in, d_override);
}

void write_libsvm(const SparseDataset& ds, std::ostream& out) {
  char buf[64];
  for (std::int64_t i = 0; i < ds.n; ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    const auto r = ds.row(i);
    for (std::size_t t = 0; t < r.size(); ++t) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g", r.idx[t] + 1, r.val[t]);
      out << buf;
    }
    out << '\n';
  }
}

SparseDataset normalize_rows(const SparseDataset& ds) {
  SparseDataset out = ds;
  for (std::int64_t i = 0; i < ds.n; ++i) {
    const auto r = ds.row(i);
    double sq = 0.0;
    for (double v : r.val) sq += v * v;
    if (sq == 0.0)
      throw std::invalid_argument("all-zero row at sample " +
                                  std::to_string(i));
    const double inv = 1.0 / std::sqrt(sq);
    const auto b = static_cast<std::size_t>(ds.row_ptr[i]);
    for (std::size_t t = 0; t < r.size(); ++t) out.values[b + t] = r.val[t] * inv;
  }
  return out;
}

std::pair<SparseDataset, SupportProfile> compute_support_profile(
    const SparseDataset& ds) {
  validate(ds);
  std::vector<std::int64_t> counts_all(static_cast<std::size_t>(ds.d), 0);
  for (std::int32_t v : ds.col_idx) ++counts_all[static_cast<std::size_t>(v)];

  SupportProfile prof;
  prof.original_d = ds.d;
  prof.old_to_new.assign(static_cast<std::size_t>(ds.d), -1);
  for (std::int64_t v = 0; v < ds.d; ++v) {
    if (counts_all[static_cast<std::size_t>(v)] > 0) {
      prof.old_to_new[static_cast<std::size_t>(v)] =
          static_cast<std::int32_t>(prof.new_to_old.size());
      prof.new_to_old.push_back(static_cast<std::int32_t>(v));
      prof.counts.push_back(counts_all[static_cast<std::size_t>(v)]);
    }
  }

  SparseDataset compact = ds;
  compact.d = static_cast<std::int64_t>(prof.new_to_old.size());
  for (auto& v : compact.col_idx)
    v = prof.old_to_new[static_cast<std::size_t>(v)];

  prof.d_diag.resize(prof.counts.size());
  std::int64_t max_count = 0;
  for (std::size_t v = 0; v < prof.counts.size(); ++v) {
    prof.d_diag[v] = static_cast<double>(ds.n) / static_cast<double>(prof.counts[v]);
    max_count = std::max(max_count, prof.counts[v]);
  }
  prof.delta = static_cast<double>(max_count) / static_cast<double>(ds.n);
  return {std::move(compact), std::move(prof)};
}

SparseDataset gen_synthetic(std::int64_t n, std::uint64_t seed) {
  SparseDataset ds;
  ds.n = n;
  ds.d = n;
  ds.row_ptr.resize(static_cast<std::size_t>(n) + 1);
  ds.col_idx.resize(static_cast<std::size_t>(n));
  ds.values.assign(static_cast<std::size_t>(n), 1.0);
  ds.labels.resize(static_cast<std::size_t>(n));
  Rng rng = derive_stream(seed, 0x5E3D, 0, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    ds.row_ptr[static_cast<std::size_t>(i)] = i;
    ds.col_idx[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
    ds.labels[static_cast<std::size_t>(i)] = rng.next_bool() ? 1.0 : -1.0;
  }
  ds.row_ptr.back() = n;
  return ds;
}

SparseDataset gen_random_sparse(std::int64_t n, std::int64_t d,
                                std::int64_t nnz_per_row, std::uint64_t seed) {
  if (nnz_per_row > d) nnz_per_row = d;
  SparseDataset ds;
  ds.n = n;
  ds.d = d;
  ds.row_ptr.push_back(0);
  Rng rng = derive_stream(seed, 0xDA7A, 0, 0);
  std::vector<std::int32_t> picks;
  for (std::int64_t i = 0; i < n; ++i) {
    picks.clear();
    while (static_cast<std::int64_t>(picks.size()) < nnz_per_row) {
      const auto v = static_cast<std::int32_t>(rng.next_below(
          static_cast<std::uint64_t>(d)));
      if (std::find(picks.begin(), picks.end(), v) == picks.end())
        picks.push_back(v);
    }
    std::sort(picks.begin(), picks.end());
    for (std::int32_t v : picks) {
      double x = 0.0;
      while (x == 0.0) x = rng.next_symmetric();
      ds.col_idx.push_back(v);
      ds.values.push_back(x);
    }
    ds.row_ptr.push_back(static_cast<std::int64_t>(ds.col_idx.size()));
    ds.labels.push_back(rng.next_bool() ? 1.0 : -1.0);
  }
  return ds;
}

std::uint64_t dataset_hash(const SparseDataset& ds) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix_bytes = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001B3ULL;
    }
  };
  mix_bytes(&ds.n, sizeof(ds.n));
  mix_bytes(&ds.d, sizeof(ds.d));
  mix_bytes(ds.row_ptr.data(), ds.row_ptr.size() * sizeof(std::int64_t));
  mix_bytes(ds.col_idx.data(), ds.col_idx.size() * sizeof(std::int32_t));
  mix_bytes(ds.values.data(), ds.values.size() * sizeof(double));
  mix_bytes(ds.labels.data(), ds.labels.size() * sizeof(double));
  return h;
}

namespace {
constexpr char kCacheMagic[8] = {'S', 'V', 'R', 'C', 'A', 'C', 'H', '1'};
}

void save_cache(const SparseDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kCacheMagic, sizeof(kCacheMagic));
  const std::int64_t nnz = ds.nnz();
  out.write(reinterpret_cast<const char*>(&ds.n), 8);
  out.write(reinterpret_cast<const char*>(&ds.d), 8);
  out.write(reinterpret_cast<const char*>(&nnz), 8);
  out.write(reinterpret_cast<const char*>(ds.row_ptr.data()),
            static_cast<std::streamsize>(ds.row_ptr.size() * 8));
  out.write(reinterpret_cast<const char*>(ds.col_idx.data()),
            static_cast<std::streamsize>(ds.col_idx.size() * 4));
  out.write(reinterpret_cast<const char*>(ds.values.data()),
            static_cast<std::streamsize>(ds.values.size() * 8));
  out.write(reinterpret_cast<const char*>(ds.labels.data()),
            static_cast<std::streamsize>(ds.labels.size() * 8));
  if (!out) throw std::runtime_error("short write to " + path);
}

SparseDataset load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0)
    throw std::runtime_error(path + ": not a dataset cache (bad magic)");
  SparseDataset ds;
  std::int64_t nnz = 0;
  in.read(reinterpret_cast<char*>(&ds.n), 8);
  in.read(reinterpret_cast<char*>(&ds.d), 8);
  in.read(reinterpret_cast<char*>(&nnz), 8);
  if (!in || ds.n < 0 || ds.d < 0 || nnz < 0)
    throw std::runtime_error(path + ": corrupt cache header");
  ds.row_ptr.resize(static_cast<std::size_t>(ds.n) + 1);
  ds.col_idx.resize(static_cast<std::size_t>(nnz));
  ds.values.resize(static_cast<std::size_t>(nnz));
  ds.labels.resize(static_cast<std::size_t>(ds.n));
  in.read(reinterpret_cast<char*>(ds.row_ptr.data()),
          static_cast<std::streamsize>(ds.row_ptr.size() * 8));
  in.read(reinterpret_cast<char*>(ds.col_idx.data()),
          static_cast<std::streamsize>(ds.col_idx.size() * 4));
  in.read(reinterpret_cast<char*>(ds.values.data()),
          static_cast<std::streamsize>(ds.values.size() * 8));
  in.read(reinterpret_cast<char*>(ds.labels.data()),
          static_cast<std::streamsize>(ds.labels.size() * 8));
  if (!in) throw std::runtime_error(path + ": truncated cache");
  return ds;
}

}  // namespace sparsevr
