#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "spanvol/io.hpp"

using namespace spanvol;

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("spanvol_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".txt");
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("comma separated rows") {
  TempFile f("1,0\n0,1\n");
  const auto m = parse_matrix(f.path.string());
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK((m - MatrixX<double>::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("whitespace rows with comments and blank lines") {
  TempFile f("1 0\n0 1\n# note\n\n1 1\n");
  const auto m = parse_matrix(f.path.string());
  CHECK(m.rows() == 3);
  CHECK(m(2, 0) == 1.0);
  CHECK(m(2, 1) == 1.0);
}

TEST_CASE("trailing comments, tabs and scientific notation") {
  TempFile f("1.5e-3\t2 # trailing\n-4,5e2\n");
  const auto m = parse_matrix(f.path.string());
  CHECK(m.rows() == 2);
  CHECK(m(0, 0) == 1.5e-3);
  CHECK(m(1, 1) == 5e2);
}

TEST_CASE("ragged rows are rejected with the line number") {
  TempFile f("1,0\n0\n");
  CHECK_THROWS_AS(parse_matrix(f.path.string()), error);
  try {
    parse_matrix(f.path.string());
  } catch (const error& e) {
    CHECK(e.code() == errc::ragged_rows);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("bad tokens are rejected with the line number") {
  TempFile f("1 2\n3 four\n");
  try {
    parse_matrix(f.path.string());
    FAIL("expected parse error");
  } catch (const error& e) {
    CHECK(e.code() == errc::parse_error);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("missing and empty files") {
  CHECK_THROWS_AS(parse_matrix("/nonexistent/spanvol.txt"), error);
  TempFile f("# only a comment\n");
  CHECK_THROWS_AS(parse_matrix(f.path.string()), error);
}

TEST_SUITE_END();
