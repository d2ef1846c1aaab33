#ifndef SPANVOL_IO_HPP
#define SPANVOL_IO_HPP

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "spanvol/errors.hpp"
#include "spanvol/types.hpp"

namespace spanvol {

/// Parse a CSV or whitespace-delimited numeric matrix. `#` starts a comment
/// that runs to the end of the line; blank lines are skipped. All data rows
/// must have the same width.
inline MatrixX<double> parse_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw error(errc::parse_error, "parse_matrix: cannot open '" + path + "'");
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    }

    std::vector<double> row;
    const char* cursor = line.data();
    const char* end = line.data() + line.size();
    while (cursor != end) {
      if (*cursor == ' ') {
        ++cursor;
        continue;
      }
      double value = 0.0;
      auto [next, ec] = std::from_chars(cursor, end, value);
      if (ec != std::errc() || (next != end && *next != ' ')) {
        throw error(errc::parse_error,
                    "parse_matrix: bad number at line " + std::to_string(line_no));
      }
      row.push_back(value);
      cursor = next;
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw error(errc::ragged_rows,
                  "parse_matrix: row width " + std::to_string(row.size()) + " at line " +
                      std::to_string(line_no) + " does not match width " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw error(errc::parse_error, "parse_matrix: no data rows in '" + path + "'");
  }

  MatrixX<double> out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

}  // namespace spanvol

#endif  // SPANVOL_IO_HPP
