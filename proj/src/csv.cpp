#include "kickchain/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kickchain::io {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

CsvTable::CsvTable(std::string schema, std::vector<std::string> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {}

void CsvTable::comment(std::string_view line) {
  comments_ += "# ";
  comments_ += line;
  comments_ += '\n';
}

void CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) {
    throw std::logic_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(columns_.size()));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
  ++rows_;
}

std::string CsvTable::render() const {
  std::string out = "# schema: " + schema_ + "\n" + comments_;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  out += body_;
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_file(path, render()); }

void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace kickchain::io
