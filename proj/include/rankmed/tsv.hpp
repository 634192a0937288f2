#pragma once

// Plot-data formats.
//
// Spectrum:    "# key=value" comment lines, then "<index>\t<eigenvalue>" rows
//              (1-based index, 12 significant digits), closed by
//              "# effective_rank=<k>".
// Score table: a header "index\tname\t<column>...", then one row per feature
//              with 17 significant digits (exact round trip).

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rankmed/error.hpp"
#include "rankmed/rank.hpp"

namespace rankmed::tsv {

inline std::string format_g(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '\t')) out.push_back(cell);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

inline void check_cell(const std::string& s) {
  if (s.find_first_of("\t\n\r") != std::string::npos)
    throw DomainError("'" + s + "' contains a tab or newline and cannot be written as a TSV cell");
}

using Meta = std::vector<std::pair<std::string, std::string>>;

inline void write_spectrum(std::ostream& out, const EigenSpectrum& spectrum, const Meta& meta = {}) {
  for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i)
    out << (i + 1) << '\t' << format_g(spectrum.eigenvalues[i], 12) << '\n';
  out << "# effective_rank=" << spectrum.effective_rank << '\n';
}

struct SpectrumFile {
  std::vector<double> eigenvalues;
  std::size_t effective_rank = 0;
  std::map<std::string, std::string> meta;
};

inline SpectrumFile read_spectrum(std::istream& in) {
  SpectrumFile out;
  bool have_rank = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "effective_rank") {
        out.effective_rank = std::stoul(value);
        have_rank = true;
      } else {
        out.meta[key] = value;
      }
      continue;
    }
    const auto cells = split_tabs(line);
    if (cells.size() != 2 || std::stoul(cells[0]) != out.eigenvalues.size() + 1)
      throw DomainError("malformed spectrum row: '" + line + "'");
    out.eigenvalues.push_back(std::stod(cells[1]));
  }
  if (!have_rank) throw DomainError("spectrum file lacks the effective_rank summary line");
  return out;
}

struct ScoreTable {
  std::vector<std::string> columns;  // value column names (after index and name)
  std::vector<std::size_t> index;    // 1-based
  std::vector<std::string> name;
  std::vector<std::vector<double>> values;
};

inline void write_scores(std::ostream& out, const ScoreTable& table) {
  out << "index\tname";
  for (const auto& c : table.columns) {
    check_cell(c);
    out << '\t' << c;
  }
  out << '\n';
  for (std::size_t r = 0; r < table.index.size(); ++r) {
    check_cell(table.name[r]);
    out << table.index[r] << '\t' << table.name[r];
    for (double v : table.values[r]) out << '\t' << format_g(v, 17);
    out << '\n';
  }
}

inline ScoreTable read_scores(std::istream& in) {
  ScoreTable t;
  std::string line;
  if (!std::getline(in, line)) throw DomainError("score table is empty");
  auto header = split_tabs(line);
  if (header.size() < 3 || header[0] != "index" || header[1] != "name")
    throw DomainError("score table header must start with 'index\\tname'");
  t.columns.assign(header.begin() + 2, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (cells.size() != header.size()) throw DomainError("malformed score row: '" + line + "'");
    t.index.push_back(std::stoul(cells[0]));
    t.name.push_back(cells[1]);
    std::vector<double> row;
    for (std::size_t k = 2; k < cells.size(); ++k) row.push_back(std::stod(cells[k]));
    t.values.push_back(std::move(row));
  }
  return t;
}

}  // namespace rankmed::tsv
