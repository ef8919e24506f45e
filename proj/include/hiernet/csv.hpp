#pragma once

#include "hiernet/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hiernet {

/// Header plus string cells of an RFC-4180 file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Position of a header name; throws InputError naming the column.
  Index column_index(const std::string& name) const;
};

/// Parses quoted fields (with "" escapes and embedded commas or line
/// breaks), LF or CRLF line ends, and an optional UTF-8 byte order mark.
/// The first record is the header. Every record must have as many fields
/// as the header.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Strict decimal parse of one cell ('.' separator). Missing-value tokens,
/// empty cells, non-finite values and trailing garbage are rejected with a
/// message naming the (1-based) data row and the column.
double parse_cell(const std::string& cell, Index row, const std::string& column);

/// Numeric matrix of the named columns, in the given order.
Matrix numeric_columns(const CsvTable& table, const std::vector<std::string>& names);

/// All header names except those listed.
std::vector<std::string> columns_except(const CsvTable& table,
                                        const std::vector<std::string>& excluded);

/// Writes a header and numeric rows, quoting names when needed.
void write_csv(std::ostream& os, const std::vector<std::string>& header, const Matrix& values);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace hiernet
