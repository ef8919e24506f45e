#include "hiernet/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace hiernet {

Index CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Index>(i);
  throw InputError("column '" + name + "' not found in CSV header");
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  auto end_field = [&]() {
    rec.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(rec));
    rec.clear();
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw InputError("CSV record " + std::to_string(records.size() + 1) +
                         ": quote inside an unquoted field");
      }
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // CRLF, handled at the '\n'
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw InputError("CSV ends inside a quoted field");
  if (field_started || !field.empty() || !rec.empty()) end_record();

  // Blank lines carry no data.
  std::vector<std::vector<std::string>> kept;
  for (auto& r : records)
    if (!(r.size() == 1 && r[0].empty())) kept.push_back(std::move(r));
  if (kept.empty()) throw InputError("CSV has no header row");

  CsvTable t;
  t.header = std::move(kept.front());
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c].empty()) throw InputError("CSV header column " + std::to_string(c + 1) + " is empty");
    for (std::size_t d = 0; d < c; ++d)
      if (t.header[d] == t.header[c]) throw InputError("CSV header repeats column '" + t.header[c] + "'");
  }
  for (std::size_t r = 1; r < kept.size(); ++r) {
    if (kept[r].size() != t.header.size()) {
      throw InputError("CSV row " + std::to_string(r) + " has " + std::to_string(kept[r].size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(kept[r]));
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

double parse_cell(const std::string& cell, Index row, const std::string& column) {
  auto where = [&]() { return "row " + std::to_string(row) + ", column '" + column + "'"; };
  std::size_t b = 0, e = cell.size();
  while (b < e && (cell[b] == ' ' || cell[b] == '\t')) ++b;
  while (e > b && (cell[e - 1] == ' ' || cell[e - 1] == '\t')) --e;
  if (b == e) throw InputError(where() + ": empty cell");
  const char* first = cell.data() + b;
  const char* last = cell.data() + e;
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw InputError(where() + ": non-numeric value '" + cell + "'");
  }
  return v;
}

Matrix numeric_columns(const CsvTable& table, const std::vector<std::string>& names) {
  std::vector<Index> idx;
  for (const auto& nm : names) idx.push_back(table.column_index(nm));
  Matrix m(static_cast<Index>(table.rows.size()), static_cast<Index>(names.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_cell(table.rows[r][static_cast<std::size_t>(idx[c])], static_cast<Index>(r + 1), names[c]);
  return m;
}

std::vector<std::string> columns_except(const CsvTable& table,
                                        const std::vector<std::string>& excluded) {
  for (const auto& e : excluded) table.column_index(e);
  std::vector<std::string> out;
  for (const auto& h : table.header) {
    bool skip = false;
    for (const auto& e : excluded) skip = skip || h == e;
    if (!skip) out.push_back(h);
  }
  return out;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const std::vector<std::string>& header, const Matrix& values) {
  if (static_cast<Index>(header.size()) != values.cols()) throw InputError("header/column count mismatch");
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << quote(header[c]);
  os << '\n';
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) os << (c ? "," : "") << format_double(values(r, c));
    os << '\n';
  }
}

}  // namespace hiernet
