#include "mfac/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "mfac/errors.hpp"

namespace mfac {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::string_view kind,
                     const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
  out_ << kCsvSchemaPrefix << ' ' << kind << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    const auto& name = header[i];
    if (name.find_first_of(",\"") == std::string::npos) {
      out_ << name;
      continue;
    }
    out_ << '"';
    for (char c : name) out_ << (c == '"' ? "\"\"" : std::string(1, c));
    out_ << '"';
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw ShapeError("csv row has " + std::to_string(values.size()) + " values, header has " +
                     std::to_string(columns_));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_number(values[i]);
  }
  out_ << '\n';
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw RangeError("no column named " + std::string(name));
}

std::vector<double> CsvTable::values(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

namespace {

/// Comma-separated fields; double quotes protect commas, "" is a literal quote.
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') {
        fields.back() += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ShapeError("unterminated quote in csv line");
  return fields;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ShapeError("malformed csv number '" + s + "'");
  }
  return v;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind(kCsvSchemaPrefix, 0) != 0) {
    throw ShapeError("missing csv schema line");
  }
  table.kind = line.size() > kCsvSchemaPrefix.size() ? line.substr(kCsvSchemaPrefix.size() + 1)
                                                      : std::string();
  if (!std::getline(in, line)) throw ShapeError("missing csv header");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != table.header.size()) throw ShapeError("ragged csv row");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mfac
