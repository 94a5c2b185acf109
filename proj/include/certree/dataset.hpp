#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "certree/bitvec.hpp"
#include "certree/errors.hpp"
#include "certree/rational.hpp"

namespace certree {

/// Binary training data stored column-wise: one bit-vector of length N per
/// feature plus the label vector.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<std::string> feature_names, std::vector<BitVector> columns, BitVector labels)
      : feature_names_(std::move(feature_names)), columns_(std::move(columns)), labels_(std::move(labels)) {
    if (feature_names_.size() != columns_.size()) {
      throw UsageError("Dataset: feature name count does not match column count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : feature_names_) {
      if (name.empty()) throw FormatError("Dataset: empty feature name");
      if (!seen.insert(name).second) throw FormatError("Dataset: duplicate feature name '" + name + "'");
    }
    for (const auto& c : columns_) {
      if (c.size() != labels_.size()) throw UsageError("Dataset: column length differs from label length");
    }
    label_one_count_ = labels_.count_ones();
  }

  /// Builds a dataset from row-major 0/1 values; names default to x0, x1, ...
  static Dataset from_rows(const std::vector<std::vector<int>>& rows, const std::vector<int>& labels,
                           std::vector<std::string> names = {}) {
    if (rows.size() != labels.size()) throw UsageError("from_rows: row/label count mismatch");
    const std::size_t m = rows.empty() ? names.size() : rows.front().size();
    if (names.empty()) {
      for (std::size_t j = 0; j < m; ++j) names.push_back("x" + std::to_string(j));
    }
    std::vector<BitVector> cols(m, BitVector(rows.size()));
    BitVector y(rows.size());
    for (std::size_t n = 0; n < rows.size(); ++n) {
      if (rows[n].size() != m) throw UsageError("from_rows: ragged rows");
      for (std::size_t j = 0; j < m; ++j) {
        if (rows[n][j] != 0) cols[j].set(n, true);
      }
      if (labels[n] != 0) y.set(n, true);
    }
    return Dataset(std::move(names), std::move(cols), std::move(y));
  }

  std::size_t n_samples() const noexcept { return labels_.size(); }
  std::size_t n_features() const noexcept { return columns_.size(); }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<BitVector>& columns() const noexcept { return columns_; }
  const BitVector& column(std::size_t j) const { return columns_.at(j); }
  const BitVector& labels() const noexcept { return labels_; }
  std::size_t label_one_count() const noexcept { return label_one_count_; }

  bool value(std::size_t sample, std::size_t feature) const { return columns_.at(feature).test(sample); }
  bool label(std::size_t sample) const { return labels_.test(sample); }

  std::size_t feature_index(const std::string& name) const {
    for (std::size_t j = 0; j < feature_names_.size(); ++j) {
      if (feature_names_[j] == name) return j;
    }
    throw UsageError("unknown feature '" + name + "'");
  }

 private:
  std::vector<std::string> feature_names_;
  std::vector<BitVector> columns_;
  BitVector labels_;
  std::size_t label_one_count_ = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells) {
    const auto b = c.find_first_not_of(" \t");
    const auto e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return cells;
}

}  // namespace detail

/// Reads a header + 0/1 CSV. All columns except `label_column` become
/// features, in header order. Row numbers in errors are 1-based data rows.
inline Dataset load_csv(std::istream& source, const std::string& label_column) {
  std::string line;
  if (!std::getline(source, line)) throw FormatError("CSV has no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // BOM
  const auto header = detail::split_csv_line(line);
  std::size_t label_idx = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) {
      if (label_idx != header.size()) throw FormatError("label column '" + label_column + "' appears twice");
      label_idx = j;
    }
  }
  if (label_idx == header.size()) throw FormatError("label column '" + label_column + "' not found in header");

  std::vector<std::vector<char>> raw(header.size());
  std::size_t row = 0;
  while (std::getline(source, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw FormatError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                        " cells, found " + std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j] != "0" && cells[j] != "1") {
        throw FormatError("non-binary cell '" + cells[j] + "' at row " + std::to_string(row) + ", column '" +
                          header[j] + "'");
      }
      raw[j].push_back(cells[j] == "1" ? 1 : 0);
    }
  }
  if (row == 0) throw FormatError("CSV has no data rows");
  if (header.size() < 2) throw FormatError("CSV has no feature columns");

  std::vector<std::string> names;
  std::vector<BitVector> cols;
  BitVector labels(row);
  for (std::size_t j = 0; j < header.size(); ++j) {
    BitVector col(row);
    for (std::size_t n = 0; n < row; ++n) {
      if (raw[j][n] != 0) col.set(n, true);
    }
    if (j == label_idx) {
      labels = std::move(col);
    } else {
      names.push_back(header[j]);
      cols.push_back(std::move(col));
    }
  }
  return Dataset(std::move(names), std::move(cols), std::move(labels));
}

/// Emits the dataset as CSV with the label as the last column.
inline void write_csv(std::ostream& out, const Dataset& ds, const std::string& label_column = "label") {
  for (const auto& name : ds.feature_names()) out << name << ',';
  out << label_column << '\n';
  for (std::size_t n = 0; n < ds.n_samples(); ++n) {
    for (std::size_t j = 0; j < ds.n_features(); ++j) out << (ds.value(n, j) ? '1' : '0') << ',';
    out << (ds.label(n) ? '1' : '0') << '\n';
  }
}

/// Capture vector of a single literal: the stored column, or its complement.
inline BitVector literal_column(const Dataset& ds, std::size_t feature, bool polarity) {
  if (feature >= ds.n_features()) {
    throw UsageError("literal_column: feature " + std::to_string(feature) + " out of range");
  }
  if (polarity) return ds.column(feature);
  return BitVector::and_not(BitVector::ones(ds.n_samples()), ds.column(feature));
}

/// Groups of samples with identical feature vectors, and the minority-label
/// mass inside each group.
struct EquivalenceIndex {
  std::vector<std::uint32_t> class_of;   // per sample
  std::vector<bool> minority_label;      // per class
  std::vector<std::size_t> class_size;   // per class
  std::vector<std::size_t> minority_count;  // per class
  std::vector<ExactValue> theta;         // per class, minority_count / N
  BitVector z;                           // samples carrying their class's minority label

  std::size_t n_classes() const noexcept { return theta.size(); }

  ExactValue theta_sum() const {
    if (class_of.empty()) return ExactValue(0);
    return ExactValue(static_cast<std::int64_t>(z.count_ones()), static_cast<std::int64_t>(class_of.size()));
  }
};

/// Class ids follow first occurrence. An even split inside a class counts
/// label 0 as the minority.
inline EquivalenceIndex build_equivalence_index(const Dataset& ds) {
  const std::size_t n = ds.n_samples();
  const std::size_t m = ds.n_features();
  const std::size_t key_words = (m + 63) / 64;
  std::vector<std::vector<std::uint64_t>> keys(n, std::vector<std::uint64_t>(key_words, 0));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& col = ds.column(j);
    for (std::size_t s = 0; s < n; ++s) {
      if (col.test(s)) keys[s][j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }

  EquivalenceIndex eq;
  eq.class_of.resize(n);
  std::map<std::vector<std::uint64_t>, std::uint32_t> ids;
  std::vector<std::size_t> ones;
  for (std::size_t s = 0; s < n; ++s) {
    auto [it, inserted] = ids.emplace(keys[s], static_cast<std::uint32_t>(eq.class_size.size()));
    if (inserted) {
      eq.class_size.push_back(0);
      ones.push_back(0);
    }
    eq.class_of[s] = it->second;
    ++eq.class_size[it->second];
    if (ds.label(s)) ++ones[it->second];
  }

  const std::size_t u = eq.class_size.size();
  eq.minority_label.resize(u);
  eq.minority_count.resize(u);
  eq.theta.reserve(u);
  for (std::size_t c = 0; c < u; ++c) {
    const std::size_t zeros = eq.class_size[c] - ones[c];
    const bool minority_is_one = ones[c] < zeros;
    eq.minority_label[c] = minority_is_one;
    eq.minority_count[c] = minority_is_one ? ones[c] : zeros;
    eq.theta.emplace_back(static_cast<std::int64_t>(eq.minority_count[c]), static_cast<std::int64_t>(n));
  }
  eq.z = BitVector(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (ds.label(s) == eq.minority_label[eq.class_of[s]]) eq.z.set(s, true);
  }
  return eq;
}

}  // namespace certree
