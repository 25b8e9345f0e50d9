#pragma once

// Datasets, labeled/unlabeled splits, file loaders and synthetic generators.

#include "green_ssl/core.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace green_ssl {

/// n samples in d dimensions with a ground-truth class id per sample.
struct Dataset {
  Matrix features;              // n x d
  std::vector<ClassId> truth;   // values in 1..class_count
  int class_count = 0;
  std::vector<std::string> class_names;  // index id-1; may be empty

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  /// Throws DataError when an invariant does not hold.
  void validate() const {
    if (size() < 1 || dim() < 1) throw DataError("dataset: empty feature matrix");
    if (static_cast<Index>(truth.size()) != size())
      throw DataError("dataset: truth length does not match sample count");
    if (class_count < 1) throw DataError("dataset: class_count must be >= 1");
    std::vector<bool> seen(static_cast<std::size_t>(class_count), false);
    for (ClassId y : truth) {
      if (y < 1 || y > class_count)
        throw DataError("dataset: class id " + std::to_string(y) +
                        " outside 1.." + std::to_string(class_count));
      seen[static_cast<std::size_t>(y - 1)] = true;
    }
    for (int c = 0; c < class_count; ++c)
      if (!seen[static_cast<std::size_t>(c)])
        throw DataError("dataset: class " + std::to_string(c + 1) + " has no samples");
    if (!features.allFinite()) throw DataError("dataset: non-finite feature value");
  }

  std::vector<Index> class_sizes() const {
    std::vector<Index> sizes(static_cast<std::size_t>(class_count), 0);
    for (ClassId y : truth) ++sizes[static_cast<std::size_t>(y - 1)];
    return sizes;
  }
};

/// The labeled part of a transductive problem. Indices are kept ascending.
struct LabeledSplit {
  std::vector<Index> labeled_indices;
  std::vector<ClassId> labels;  // aligned with labeled_indices
  std::uint64_t seed = 0;

  Index labeled_count() const { return static_cast<Index>(labeled_indices.size()); }

  std::vector<bool> mask(Index n) const {
    std::vector<bool> m(static_cast<std::size_t>(n), false);
    for (Index i : labeled_indices) m[static_cast<std::size_t>(i)] = true;
    return m;
  }

  void validate(const Dataset& ds) const {
    if (labels.size() != labeled_indices.size())
      throw DataError("split: labels and indices differ in length");
    std::set<Index> distinct;
    for (std::size_t j = 0; j < labeled_indices.size(); ++j) {
      const Index i = labeled_indices[j];
      if (i < 0 || i >= ds.size()) throw DataError("split: index out of range");
      if (!distinct.insert(i).second) throw DataError("split: duplicate index");
      if (labels[j] != ds.truth[static_cast<std::size_t>(i)])
        throw DataError("split: label disagrees with ground truth at sample " +
                        std::to_string(i));
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> parse_double(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

/// Maps raw label tokens to dense class ids. Numeric labels are ranked by
/// value (so 1..c stays 1..c and {-1,+1} becomes {1,2}); any non-numeric
/// token switches the whole column to first-appearance order.
inline std::pair<std::vector<ClassId>, std::vector<std::string>> map_labels(
    const std::vector<std::string>& raw) {
  bool numeric = true;
  std::vector<double> values;
  values.reserve(raw.size());
  for (const auto& r : raw) {
    const auto v = parse_double(r);
    if (!v) {
      numeric = false;
      break;
    }
    values.push_back(*v);
  }
  std::vector<ClassId> ids(raw.size());
  std::vector<std::string> names;
  if (numeric) {
    std::map<double, ClassId> rank;
    for (double v : values) rank.emplace(v, 0);
    ClassId next = 1;
    for (auto& [value, id] : rank) {
      id = next++;
      std::ostringstream os;
      os << value;
      names.push_back(os.str());
    }
    for (std::size_t i = 0; i < values.size(); ++i) ids[i] = rank.at(values[i]);
  } else {
    std::map<std::string, ClassId> first_seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto [it, inserted] =
          first_seen.emplace(raw[i], static_cast<ClassId>(first_seen.size() + 1));
      if (inserted) names.push_back(raw[i]);
      ids[i] = it->second;
    }
  }
  return {std::move(ids), std::move(names)};
}

}  // namespace detail

/// Loads a comma-separated file. `label_column` is 0-based; a negative value
/// counts from the end (-1 is the last column). A first row whose feature
/// cells are not all numeric is treated as a header.
inline Dataset load_csv(const std::string& path, int label_column = -1) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    rows.push_back(detail::split_commas(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw DataError("empty file: " + path);

  const auto width = rows.front().size();
  if (width < 2) throw DataError(path + ": need at least one feature and one label column");
  const int label_col =
      label_column < 0 ? static_cast<int>(width) + label_column : label_column;
  if (label_col < 0 || label_col >= static_cast<int>(width))
    throw ConfigError(path + ": label column " + std::to_string(label_column) +
                      " out of range for " + std::to_string(width) + " columns");

  auto feature_cells_numeric = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c)
      if (static_cast<int>(c) != label_col && !detail::parse_double(row[c])) return false;
    return true;
  };
  std::size_t first = 0;
  if (!feature_cells_numeric(rows.front())) first = 1;
  if (first >= rows.size()) throw DataError("empty file: " + path + " (header only)");

  const auto n = static_cast<Index>(rows.size() - first);
  const auto d = static_cast<Index>(width - 1);
  Dataset ds;
  ds.features.resize(n, d);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(static_cast<std::size_t>(n));
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width)
      throw DataError(path + ": row " + std::to_string(line_numbers[r]) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(width));
    Index f = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == label_col) {
        raw_labels.push_back(row[c]);
        continue;
      }
      const auto v = detail::parse_double(row[c]);
      if (!v || !std::isfinite(*v))
        throw DataError(path + ": non-numeric feature at row " +
                        std::to_string(line_numbers[r]) + ", col " +
                        std::to_string(c + 1) + ": '" + row[c] + "'");
      ds.features(static_cast<Index>(r - first), f++) = *v;
    }
  }
  auto [ids, names] = detail::map_labels(raw_labels);
  ds.truth = std::move(ids);
  ds.class_names = std::move(names);
  ds.class_count = static_cast<int>(ds.class_names.size());
  ds.validate();
  return ds;
}

/// Loads "label idx:val idx:val ..." lines with 1-based feature indices.
inline Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  struct Row {
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  std::vector<std::string> raw_labels;
  Index dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string label;
    if (!(tokens >> label)) continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (!detail::parse_double(label)) throw DataError(where + ": malformed label '" + label + "'");
    Row row;
    std::set<Index> used;
    std::string tok;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw DataError(where + ": malformed token '" + tok + "'");
      const auto idx = detail::parse_double(tok.substr(0, colon));
      const auto val = detail::parse_double(tok.substr(colon + 1));
      if (!idx || !val || *idx != std::floor(*idx) || !std::isfinite(*val))
        throw DataError(where + ": malformed token '" + tok + "'");
      if (*idx < 1) throw DataError(where + ": feature index < 1 in '" + tok + "'");
      const auto j = static_cast<Index>(*idx);
      if (!used.insert(j).second)
        throw DataError(where + ": duplicate feature index " + std::to_string(j));
      row.entries.emplace_back(j - 1, *val);
      dim = std::max(dim, j);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(label);
  }
  if (rows.empty()) throw DataError("empty file: " + path);

  Dataset ds;
  ds.features = Matrix::Zero(static_cast<Index>(rows.size()), std::max<Index>(dim, 1));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [j, v] : rows[r].entries) ds.features(static_cast<Index>(r), j) = v;
  auto [ids, names] = detail::map_labels(raw_labels);
  ds.truth = std::move(ids);
  ds.class_names = std::move(names);
  ds.class_count = static_cast<int>(ds.class_names.size());
  ds.validate();
  return ds;
}

/// Writes features followed by the class id as the last column, no header.
inline void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << std::setprecision(17);
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < ds.dim(); ++j) out << ds.features(i, j) << ',';
    out << ds.truth[static_cast<std::size_t>(i)] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct TwoRingParams {
  Index n_inner = 500;
  Index n_outer = 1000;
  double r_inner = 1.0;
  double r_outer = 2.0;
  double noise = 0.02;
  std::uint64_t seed = 0;
};

/// Two concentric rings in the plane: inner ring class 1, outer ring class 2.
/// Points sit at uniformly spaced angles; noise is radial only.
inline Dataset gen_two_ring(const TwoRingParams& p) {
  require(p.n_inner >= 1 && p.n_outer >= 1, "two-ring: counts must be >= 1");
  require(p.r_inner > 0.0, "two-ring: r_inner must be positive");
  require(p.r_inner < p.r_outer, "two-ring: r_inner must be smaller than r_outer");
  require(p.noise >= 0.0, "two-ring: noise must be >= 0");

  Rng rng(p.seed);
  Dataset ds;
  const Index n = p.n_inner + p.n_outer;
  ds.features.resize(n, 2);
  ds.truth.resize(static_cast<std::size_t>(n));
  ds.class_count = 2;
  ds.class_names = {"inner", "outer"};
  auto ring = [&](Index offset, Index count, double radius, ClassId id) {
    for (Index j = 0; j < count; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(count);
      const double r = p.noise > 0.0 ? radius + p.noise * rng.normal() : radius;
      ds.features(offset + j, 0) = r * std::cos(angle);
      ds.features(offset + j, 1) = r * std::sin(angle);
      ds.truth[static_cast<std::size_t>(offset + j)] = id;
    }
  };
  ring(0, p.n_inner, p.r_inner, 1);
  ring(p.n_inner, p.n_outer, p.r_outer, 2);
  return ds;
}

struct BlobParams {
  Index n = 200;
  int classes = 3;
  Index dim = 2;
  double spread = 1.0;      // within-class standard deviation
  double separation = 4.0;  // scale of the class centers
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters; samples are assigned to classes round-robin
/// so every class is populated.
inline Dataset gen_blobs(const BlobParams& p) {
  require(p.n >= p.classes && p.classes >= 1 && p.dim >= 1, "blobs: invalid sizes");
  Rng rng(p.seed);
  Matrix centers(p.classes, p.dim);
  for (Index c = 0; c < p.classes; ++c)
    for (Index j = 0; j < p.dim; ++j) centers(c, j) = p.separation * rng.normal();
  Dataset ds;
  ds.features.resize(p.n, p.dim);
  ds.truth.resize(static_cast<std::size_t>(p.n));
  ds.class_count = p.classes;
  for (Index i = 0; i < p.n; ++i) {
    const auto c = static_cast<Index>(i % p.classes);
    for (Index j = 0; j < p.dim; ++j)
      ds.features(i, j) = centers(c, j) + p.spread * rng.normal();
    ds.truth[static_cast<std::size_t>(i)] = static_cast<ClassId>(c + 1);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Draws exactly `per_class` labeled samples from every class without
/// replacement. Deterministic per seed.
inline LabeledSplit sample_split(const Dataset& ds, Index per_class, std::uint64_t seed) {
  require(per_class >= 1, "per_class must be >= 1");
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(ds.class_count));
  for (Index i = 0; i < ds.size(); ++i)
    members[static_cast<std::size_t>(ds.truth[static_cast<std::size_t>(i)] - 1)].push_back(i);
  for (std::size_t c = 0; c < members.size(); ++c)
    if (static_cast<Index>(members[c].size()) < per_class)
      throw ConfigError("per_class = " + std::to_string(per_class) + " exceeds the " +
                        std::to_string(members[c].size()) + " samples of class " +
                        std::to_string(c + 1));

  Rng rng(seed);
  LabeledSplit split;
  split.seed = seed;
  for (auto& pool : members) {
    // Partial Fisher-Yates: the first per_class slots become the sample.
    for (Index j = 0; j < per_class; ++j) {
      const auto remaining = static_cast<std::uint64_t>(pool.size()) - static_cast<std::uint64_t>(j);
      const auto pick = static_cast<std::size_t>(j) + static_cast<std::size_t>(rng.uniform_index(remaining));
      std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
      split.labeled_indices.push_back(pool[static_cast<std::size_t>(j)]);
    }
  }
  std::sort(split.labeled_indices.begin(), split.labeled_indices.end());
  split.labels.reserve(split.labeled_indices.size());
  for (Index i : split.labeled_indices) split.labels.push_back(ds.truth[static_cast<std::size_t>(i)]);
  return split;
}

}  // namespace green_ssl
