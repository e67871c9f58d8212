#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfac/csv.hpp"

namespace mfac::cli {

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::string y_label;
  bool log_y = false;
};

/// Line chart of the named columns. Non-finite values break the line.
std::string render_svg(const CsvTable& table, const PlotSpec& spec);

/// Reads `csv` back from disk and writes the chart next to it.
void plot_csv(const std::filesystem::path& csv, const std::filesystem::path& svg,
              const PlotSpec& spec);

}  // namespace mfac::cli
