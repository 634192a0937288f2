#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rankmed/digest.hpp"
#include "rankmed/error.hpp"
#include "rankmed/feature_matrix.hpp"

namespace rankmed {

/// Per-instance class codes. Codes are 0-based in the API (code l is the
/// (l+1)-th class in order of first appearance); reports use class names.
class LabelVector {
 public:
  LabelVector(std::vector<std::size_t> codes, std::vector<std::string> class_names)
      : codes_(std::move(codes)), names_(std::move(class_names)), counts_(names_.size(), 0) {
    if (names_.empty()) throw DomainError("label vector needs at least one class");
    if (codes_.empty()) throw DomainError("label vector is empty");
    std::unordered_set<std::string> seen;
    for (const auto& n : names_)
      if (!seen.insert(n).second) throw DomainError("duplicate class name '" + n + "'");
    for (auto code : codes_) {
      if (code >= names_.size()) throw DomainError("class code out of range");
      ++counts_[code];
    }
    for (std::size_t l = 0; l < counts_.size(); ++l)
      if (counts_[l] == 0) throw DomainError("class '" + names_[l] + "' has no instances");
  }

  /// Encodes label strings by first appearance.
  static LabelVector from_strings(const std::vector<std::string>& labels) {
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> names;
    std::vector<std::size_t> codes;
    codes.reserve(labels.size());
    for (const auto& s : labels) {
      auto [it, inserted] = index.try_emplace(s, names.size());
      if (inserted) names.push_back(s);
      codes.push_back(it->second);
    }
    return LabelVector(std::move(codes), std::move(names));
  }

  std::size_t size() const noexcept { return codes_.size(); }
  std::size_t classes() const noexcept { return names_.size(); }
  std::size_t code(std::size_t i) const { return codes_.at(i); }
  const std::vector<std::size_t>& codes() const noexcept { return codes_; }
  const std::vector<std::size_t>& class_counts() const noexcept { return counts_; }
  const std::vector<std::string>& class_names() const noexcept { return names_; }

  LabelVector subset(const std::vector<std::size_t>& instances) const {
    std::vector<std::size_t> out;
    out.reserve(instances.size());
    for (auto i : instances) out.push_back(codes_.at(i));
    return LabelVector(std::move(out), names_);
  }

 private:
  std::vector<std::size_t> codes_;
  std::vector<std::string> names_;
  std::vector<std::size_t> counts_;
};

/// Y in R^{c x n}: column i is the unit vector of instance i's class.
inline Eigen::MatrixXd one_hot(const LabelVector& labels) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.classes()),
                                            static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    y(static_cast<Eigen::Index>(labels.code(i)), static_cast<Eigen::Index>(i)) = 1.0;
  return y;
}

struct SourceInfo {
  std::string path;
  std::string sha256;
};

struct Dataset {
  FeatureMatrix features;
  LabelVector labels;
  std::string label_column;
  std::vector<std::string> dropped_features;
  SourceInfo source;
};

struct LoadOptions {
  std::string label_column = "label";
  double variance_floor = 0.0;
  std::vector<std::string> ignore_columns;
};

namespace csv {

/// Splits one CSV record on commas. Double-quoted fields may contain commas
/// and doubled quotes.
inline std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cell.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

/// Parses a complete finite decimal (scientific notation allowed).
inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

/// Shortest representation that parses back to the identical double.
inline std::string format_exact(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace csv

namespace detail {

/// True when the values are not all identical and their sample variance exceeds floor.
inline bool has_variance(const std::vector<double>& v, double floor) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return false;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1) > floor;
}

}  // namespace detail

/// Parses CSV text (header row, instances as rows) into a Dataset. Features
/// whose sample variance is <= variance_floor are dropped; exactly constant
/// columns are always dropped.
inline Dataset parse_csv(std::string_view text, const LoadOptions& opts, SourceInfo source) {
  if (opts.variance_floor < 0.0 || !std::isfinite(opts.variance_floor))
    throw DomainError("variance floor must be finite and >= 0");

  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  while (!lines.empty() && csv::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw IngestError(IngestErrc::empty_file, source.path + " has no header row");

  std::vector<std::string> header;
  for (auto& h : csv::split_record(lines.front())) header.emplace_back(csv::trim(h));
  {
    std::unordered_set<std::string> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second)
        throw IngestError(IngestErrc::duplicate_column, "duplicate column name '" + h + "' in header");
  }

  const auto label_it = std::find(header.begin(), header.end(), opts.label_column);
  if (label_it == header.end())
    throw IngestError(IngestErrc::missing_label_column,
                      "label column '" + opts.label_column + "' not found in " + source.path);
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  std::vector<bool> skip(header.size(), false);
  skip[label_col] = true;
  for (const auto& name : opts.ignore_columns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw IngestError(IngestErrc::unknown_column, "ignored column '" + name + "' not found");
    skip[static_cast<std::size_t>(it - header.begin())] = true;
  }

  std::vector<std::size_t> feature_cols;
  for (std::size_t k = 0; k < header.size(); ++k)
    if (!skip[k]) feature_cols.push_back(k);

  std::vector<std::vector<double>> columns(feature_cols.size());
  std::vector<std::string> label_strings;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = csv::split_record(lines[r]);
    const std::string where = "line " + std::to_string(r + 1);
    if (cells.size() != header.size())
      throw IngestError(IngestErrc::ragged_row, where + " has " + std::to_string(cells.size()) +
                                                    " cells, header has " + std::to_string(header.size()));
    const auto label = csv::trim(cells[label_col]);
    if (label.empty())
      throw IngestError(IngestErrc::missing_value, where + ", column '" + header[label_col] + "' is empty");
    label_strings.emplace_back(label);
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const auto& cell = cells[feature_cols[f]];
      const std::string at = where + ", column '" + header[feature_cols[f]] + "'";
      if (csv::trim(cell).empty()) throw IngestError(IngestErrc::missing_value, at + " is empty");
      const auto value = csv::parse_number(cell);
      if (!value) throw IngestError(IngestErrc::non_numeric_cell, at + ": '" + cell + "' is not a finite number");
      columns[f].push_back(*value);
    }
  }

  const std::size_t n = label_strings.size();
  if (n < 2)
    throw IngestError(IngestErrc::too_few_instances, "need at least 2 instances, found " + std::to_string(n));

  std::vector<std::size_t> kept;
  std::vector<std::string> dropped;
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    if (detail::has_variance(columns[f], opts.variance_floor))
      kept.push_back(f);
    else
      dropped.push_back(header[feature_cols[f]]);
  }
  if (kept.empty()) throw IngestError(IngestErrc::no_features, "no feature survives the variance filter");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(n));
  std::vector<std::string> names;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& col = columns[kept[r]];
    for (std::size_t i = 0; i < n; ++i) values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = col[i];
    names.push_back(header[feature_cols[kept[r]]]);
  }

  return Dataset{FeatureMatrix(std::move(values), std::move(names)), LabelVector::from_strings(label_strings),
                 opts.label_column, std::move(dropped), std::move(source)};
}

inline Dataset load_csv(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(IngestErrc::file_not_found, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return parse_csv(bytes, opts, SourceInfo{path, sha256_hex(bytes)});
}

/// Writes the dataset back in the instances-as-rows layout, label column last.
inline void write_csv(std::ostream& out, const Dataset& data) {
  const auto& f = data.features;
  for (std::size_t j = 0; j < f.features(); ++j) out << csv::quote_if_needed(f.name(j)) << ',';
  out << csv::quote_if_needed(data.label_column) << '\n';
  for (std::size_t i = 0; i < f.instances(); ++i) {
    for (std::size_t j = 0; j < f.features(); ++j)
      out << csv::format_exact(f.values()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) << ',';
    out << csv::quote_if_needed(data.labels.class_names()[data.labels.code(i)]) << '\n';
  }
}

}  // namespace rankmed
