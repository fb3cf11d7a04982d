#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lgmcheck/io.hpp"
#include "test_util.hpp"

using namespace lgmcheck;

namespace {
std::string tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lgmcheck_io";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}
}  // namespace

TEST_CASE("csv reading") {
  const std::string p = tmp("a.csv");
  {
    std::ofstream f(p);
    f << "x,\"name, quoted\",z\n1,a,2.5\n-3e2,b,0\n";
  }
  const CsvTable t = read_csv(p);
  CHECK(t.header.size() == 3);
  CHECK(t.has_column("name, quoted"));
  CHECK(t.numeric("x")(1) == -300.0);
  CHECK(t.strings("name, quoted")[1] == "b");
  CHECK(THROWN_CODE(t.numeric("name, quoted")) == "ParseError");
  CHECK(THROWN_CODE(t.numeric("missing")) == "ConfigError");
  CHECK(THROWN_CODE(read_csv(tmp("nope.csv"))) == "IoError");
}

TEST_CASE("matrix and vector round trip") {
  Mat m(2, 3);
  m << 1.0 / 3.0, -2, 1e-300, 4, 5.5, 6;
  write_matrix_csv(tmp("m.csv"), m);
  CHECK(read_matrix_csv(tmp("m.csv")) == m);
  const Vec v = Vec::LinSpaced(5, -1.0 / 7.0, 3.0);
  write_vector(tmp("v.csv"), v);
  CHECK(read_vector(tmp("v.csv")) == v);
}

TEST_CASE("edge lists") {
  const std::string p = tmp("e.csv");
  {
    std::ofstream f(p);
    f << "node_a,node_b\n1,2\n2,3\n";
  }
  const auto e = read_edges(p);
  REQUIRE(e.size() == 2);
  CHECK(e[1] == std::pair<int, int>{2, 3});
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23}) CHECK(std::stod(format_double(x)) == x);
}
