#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace oscmfg {

// 9 significant digits; "nan" for NaN.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  // First column is a label, the rest numbers.
  void labeled_row(const std::string& label, std::span<const double> values);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Long format `series,x,y`; header only when there is nothing to plot.
void emit_plotdata(const std::filesystem::path& path, const std::vector<PlotSeries>& series);

}  // namespace oscmfg
