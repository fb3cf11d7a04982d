#include "lgmcheck/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lgmcheck/error.hpp"

namespace lgmcheck {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r' || s[a] == '"')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r' || s[b - 1] == '"')) --b;
  return s.substr(a, b - a);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  if (t.empty()) throw Error(ErrorCode::ParseError, "empty numeric field in " + context);
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw Error(ErrorCode::ParseError, "bad number '" + t + "' in " + context);
  return v;
}

int CsvTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw Error(ErrorCode::ConfigError, "column '" + name + "' not found");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

Vec CsvTable::numeric(const std::string& name) const {
  const int j = column_index(name);
  Vec v(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) v(i) = parse_double(rows[i][j], "column " + name);
  return v;
}

std::vector<std::string> CsvTable::strings(const std::string& name) const {
  const int j = column_index(name);
  std::vector<std::string> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[j]);
  return v;
}

CsvTable read_csv(const std::string& path) {
  auto in = open_in(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty CSV '" + path + "'");
  t.header = split_csv_line(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size())
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Mat read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "empty matrix file '" + path + "'");
  auto head = split_csv_line(line);
  if (head.size() != 2 || head[0] != "ncols")
    throw Error(ErrorCode::ParseError, path + ": first line must be 'ncols,<n>'");
  const double nc = parse_double(head[1], path + " header");
  if (nc < 1 || nc != static_cast<int>(nc)) throw Error(ErrorCode::ParseError, path + ": bad ncols");
  const int ncols = static_cast<int>(nc);
  std::vector<double> vals;
  int nrows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) != ncols)
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected " +
                                             std::to_string(ncols) + " values");
    for (const auto& s : f) vals.push_back(parse_double(s, path));
    ++nrows;
  }
  Mat m(nrows, ncols);
  for (int i = 0; i < nrows; ++i)
    for (int j = 0; j < ncols; ++j) m(i, j) = vals[static_cast<size_t>(i) * ncols + j];
  return m;
}

void write_matrix_csv(const std::string& path, const Mat& m) {
  auto out = open_out(path);
  out << "ncols," << m.cols() << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
}

Vec read_vector(const std::string& path) {
  auto in = open_in(path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    vals.push_back(parse_double(line, path));
  }
  return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void write_vector(const std::string& path, const Vec& v) {
  auto out = open_out(path);
  for (int i = 0; i < v.size(); ++i) out << format_double(v(i)) << "\n";
}

std::vector<std::pair<int, int>> read_edges(const std::string& path) {
  auto t = read_csv(path);
  if (t.header.size() < 2) throw Error(ErrorCode::ParseError, path + ": edge list needs two columns");
  std::vector<std::pair<int, int>> e;
  for (const auto& r : t.rows) {
    const double a = parse_double(r[0], path), b = parse_double(r[1], path);
    if (a < 1 || b < 1 || a != static_cast<int>(a) || b != static_cast<int>(b))
      throw Error(ErrorCode::ParseError, path + ": node ids must be positive integers");
    e.emplace_back(static_cast<int>(a), static_cast<int>(b));
  }
  return e;
}

}  // namespace lgmcheck
