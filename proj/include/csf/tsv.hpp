#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csf/types.hpp"

namespace csf {

// Tab-separated numeric tables, UTF-8, LF line endings. Doubles are written
// in the shortest form that round-trips exactly.

std::vector<std::vector<double>> read_tsv_rows(const std::filesystem::path& file);

// full_precision forces 17 significant digits; the default writes the
// shortest representation that still round-trips.
void write_tsv_matrix(const Matrix& m, const std::filesystem::path& file,
                      bool full_precision = false);
Matrix read_tsv_matrix(const std::filesystem::path& file);

// Table with a header row of column names.
struct TsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_tsv_table(const TsvTable& table, const std::filesystem::path& file);
TsvTable read_tsv_table(const std::filesystem::path& file);

}  // namespace csf
