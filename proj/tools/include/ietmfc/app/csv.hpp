#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ietmfc::app {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Builds a CSV document in memory; fields never contain separators.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(double value);
  CsvWriter& cell(long value);
  CsvWriter& cell(int value) { return cell(static_cast<long>(value)); }
  CsvWriter& cells(const Eigen::VectorXd& values);
  void end_row();

  const std::string& text() const { return text_; }
  std::size_t columns() const { return columns_; }

 private:
  std::string text_;
  std::size_t columns_ = 0;
  std::size_t pending_ = 0;
};

/// Column names prefix_0 .. prefix_{n-1}.
std::vector<std::string> indexed_columns(std::string_view prefix, long n);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws std::out_of_range if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
  /// All columns named prefix_0, prefix_1, ... in order.
  std::vector<std::size_t> indexed(std::string_view prefix) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see a
/// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ietmfc::app
