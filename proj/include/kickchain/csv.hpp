// Plain CSV output with a versioned schema line.
#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace kickchain::io {

/// 12 significant digits ("%.12g"), the precision of every exported number.
std::string format_number(double x);

/// Collects rows in memory and writes them in one go. The first line is
/// "# schema: <schema>", then optional comment lines, then the header.
class CsvTable {
 public:
  CsvTable(std::string schema, std::vector<std::string> columns);

  void comment(std::string_view line);
  /// Cells are pre-formatted strings; the count must match the header.
  void row(std::vector<std::string> cells);

  std::size_t rows() const { return rows_; }
  std::string render() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string schema_;
  std::vector<std::string> columns_;
  std::string body_;
  std::string comments_;
  std::size_t rows_ = 0;
};

/// Writes text to a file, throwing std::runtime_error on failure.
void write_file(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

}  // namespace kickchain::io
