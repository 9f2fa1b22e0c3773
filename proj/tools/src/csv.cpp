#include "ietmfc/app/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace ietmfc::app {

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double: buffer too small");
  return std::string(buf, end);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != 0) text_ += ',';
    text_ += header[c];
  }
  text_ += '\n';
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (pending_ != 0) text_ += ',';
  text_ += text;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(format_double(value)); }

CsvWriter& CsvWriter::cell(long value) { return cell(std::to_string(value)); }

CsvWriter& CsvWriter::cells(const Eigen::VectorXd& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) cell(values(i));
  return *this;
}

void CsvWriter::end_row() {
  if (pending_ != columns_)
    throw std::logic_error("CsvWriter: row has " + std::to_string(pending_) +
                           " cells, header has " + std::to_string(columns_));
  text_ += '\n';
  pending_ = 0;
}

std::vector<std::string> indexed_columns(std::string_view prefix, long n) {
  std::vector<std::string> out;
  for (long i = 0; i < n; ++i) out.push_back(std::string(prefix) + "_" + std::to_string(i));
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return c;
  throw std::out_of_range("CSV column '" + std::string(name) + "' not found");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& text = rows.at(row).at(col);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::runtime_error("CSV cell '" + text + "' is not a number");
  return value;
}

std::vector<std::size_t> CsvTable::indexed(std::string_view prefix) const {
  std::vector<std::size_t> out;
  for (long i = 0;; ++i) {
    const std::string name = std::string(prefix) + "_" + std::to_string(i);
    if (!has_column(name)) break;
    out.push_back(column(name));
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  bool first = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw std::runtime_error("CSV row width does not match its header");
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ietmfc::app
