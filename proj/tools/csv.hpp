#pragma once

#include <string>
#include <vector>

namespace pinch::cli {

/// Shortest decimal text that round-trips the double.
std::string format_number(double v);

/// CSV table with '#' comment lines ahead of the header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void comment(const std::string& text);
  void add_row(const std::vector<std::string>& cells);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t row_count() const { return rows_.size(); }
  /// Header plus rows (no comments).
  std::string body() const;
  std::string text() const;

  /// Writes to a temporary file next to `path` and renames it into place.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

}  // namespace pinch::cli
