#include "oscmfg/csv.hpp"

#include <cmath>
#include <fmt/format.h>

#include "oscmfg/error.hpp"

namespace oscmfg {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.9g}", v);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path) {
  if (!out_) throw DomainError("io", "cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
  if (!out_) throw DomainError("io", "write to " + path_.string() + " failed");
}

void CsvWriter::labeled_row(const std::string& label, std::span<const double> values) {
  out_ << label;
  for (double v : values) out_ << ',' << format_number(v);
  out_ << '\n';
  if (!out_) throw DomainError("io", "write to " + path_.string() + " failed");
}

void emit_plotdata(const std::filesystem::path& path, const std::vector<PlotSeries>& series) {
  CsvWriter w(path, {"series", "x", "y"});
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DomainError("invalid_params", "series '" + s.name + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xy[2] = {s.x[i], s.y[i]};
      w.labeled_row(s.name, xy);
    }
  }
}

}  // namespace oscmfg
