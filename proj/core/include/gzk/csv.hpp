#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace gzk {

/// Comma-separated writer with fixed 17-significant-digit formatting, so
/// identical doubles always produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::filesystem::path path_;
};

std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// Column index by name; throws InvalidArgument when absent.
  std::size_t column(const std::string& name) const;
};

/// Numeric CSV with one header line. Throws IoError on malformed input.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gzk
