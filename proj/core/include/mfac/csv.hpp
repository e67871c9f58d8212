#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mfac {

/// First line of every CSV the library writes.
inline constexpr std::string_view kCsvSchemaPrefix = "# mfac-csv v1";

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite values.
std::string format_number(double value);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view kind, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

struct CsvTable {
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws RangeError when absent.
  std::size_t column(std::string_view name) const;
  std::vector<double> values(std::string_view name) const;
};

/// Parses a file produced by CsvWriter. Throws ShapeError on malformed input.
CsvTable read_csv(std::istream& in);

}  // namespace mfac
