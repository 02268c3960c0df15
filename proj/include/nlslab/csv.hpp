#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nlslab {

// CSV file with a provenance comment line, a header row, and every value
// written at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& provenance, const std::vector<std::string>& columns)
      : path_(path), os_(path), width_(columns.size()) {
    if (!os_) throw IoError("csv: cannot open " + path.string() + " for writing");
    os_ << "# " << provenance << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n' << std::setprecision(17);
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw IoError("csv: row width differs from the header in " + path_.string());
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
    os_ << '\n';
    if (!os_) throw IoError("csv: write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
  std::size_t width_;
};

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace nlslab
