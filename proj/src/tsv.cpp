#include "csf/tsv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "csf/util.hpp"

namespace csf {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& field, const std::filesystem::path& file, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::runtime_error(file.string() + ":" + std::to_string(line_no) +
                             ": cannot parse number '" + field + "'");
  }
  return v;
}

std::ifstream open_for_read(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("missing file: " + file.string());
  return in;
}

}  // namespace

std::vector<std::vector<double>> read_tsv_rows(const std::filesystem::path& file) {
  std::ifstream in = open_for_read(file);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& field : split_tabs(line)) {
      row.push_back(parse_double(field, file, line_no));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_tsv_matrix(const Matrix& m, const std::filesystem::path& file, bool full_precision) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write file: " + file.string());
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << '\t';
      if (full_precision) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
        out << buf;
      } else {
        out << format_double(m(i, j));
      }
    }
    out << '\n';
  }
}

Matrix read_tsv_matrix(const std::filesystem::path& file) {
  auto rows = read_tsv_rows(file);
  if (rows.empty()) return Matrix(0, 0);
  std::size_t cols = rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw std::runtime_error(file.string() + ":" + std::to_string(i + 1) + ": expected " +
                               std::to_string(cols) + " columns, got " +
                               std::to_string(rows[i].size()));
    }
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_tsv_table(const TsvTable& table, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write file: " + file.string());
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out << '\t';
    out << table.columns[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << '\t';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

TsvTable read_tsv_table(const std::filesystem::path& file) {
  std::ifstream in = open_for_read(file);
  TsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(file.string() + ": empty table");
  table.columns = split_tabs(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& field : split_tabs(line)) {
      row.push_back(parse_double(field, file, line_no));
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error(file.string() + ":" + std::to_string(line_no) +
                               ": row width does not match header");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace csf
