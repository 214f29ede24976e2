#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hvacrl {

// Shortest round-trip decimal rendering of a double (via std::to_chars), so
// rewriting the same values produces byte-identical files.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& cells);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t row_count() const { return rows_.size(); }

  std::string to_string() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws std::runtime_error naming the offending 1-based line on ragged
  // rows, empty files, or unparsable numerics (via the typed accessors).
  static CsvTable read(const std::filesystem::path& path);

  int column(const std::string& name) const;  // -1 when absent
  int require_column(const std::string& name) const;
  double number(std::size_t row, int col) const;
  const std::string& cell(std::size_t row, int col) const;
};

}  // namespace hvacrl
