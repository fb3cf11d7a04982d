#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lgmcheck/linalg.hpp"

namespace lgmcheck {

// Headered CSV held as strings; numeric access parses on demand.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] int column_index(const std::string& name) const;
  [[nodiscard]] bool has_column(const std::string& name) const;
  [[nodiscard]] Vec numeric(const std::string& name) const;
  [[nodiscard]] std::vector<std::string> strings(const std::string& name) const;
};

[[nodiscard]] CsvTable read_csv(const std::string& path);
[[nodiscard]] std::vector<std::string> split_csv_line(const std::string& line);
[[nodiscard]] double parse_double(const std::string& s, const std::string& context);

// Dense matrix: first line "ncols,<n>", then one comma-separated row per line.
[[nodiscard]] Mat read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Mat& m);
// One value per line.
[[nodiscard]] Vec read_vector(const std::string& path);
void write_vector(const std::string& path, const Vec& v);
// Two-column edge list "node_a,node_b" with 1-based ids.
[[nodiscard]] std::vector<std::pair<int, int>> read_edges(const std::string& path);

[[nodiscard]] std::string format_double(double v);  // 17 significant digits

}  // namespace lgmcheck
