#include "doctest.h"

#include "qlap/matrix_io.hpp"
#include "qlap/random.hpp"
#include "support.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

using namespace qlap;
using Eigen::MatrixXd;

TEST_CASE("splitmix64 reference stream") {
  // published test vector for seed 0
  Rng rng(0);
  CHECK(rng.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next_u64() == 0x06c45d188009454fULL);
}

TEST_CASE("distributions") {
  Rng rng(42);
  int hits[5] = {};
  double lo = 1, hi = 0;
  for (int k = 0; k < 5000; ++k) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    ++hits[rng.integer(0, 4)];
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  for (int h : hits) CHECK(std::abs(h - 1000) < 120);
  CHECK(rng.integer(3, 3) == 3);
  CHECK_THROWS_AS(rng.integer(2, 1), std::invalid_argument);
}

TEST_CASE("substreams depend on the root seed only") {
  Rng a(7), b(7);
  a.next_u64();
  a.next_u64();
  CHECK(a.substream("x", 1).next_u64() == b.substream("x", 1).next_u64());
  CHECK(b.substream("x", 1).next_u64() != b.substream("x", 2).next_u64());
  CHECK(b.substream("x").next_u64() != b.substream("y").next_u64());
  CHECK(Rng(8).substream("x").next_u64() != b.substream("x").next_u64());
}

TEST_CASE("shuffle is a permutation and reproducible") {
  std::vector<int> v(50), w;
  for (int k = 0; k < 50; ++k) v[k] = k;
  w = v;
  Rng(3).shuffle(v);
  Rng(3).shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < 50; ++k) CHECK(sorted[k] == k);
}

TEST_CASE("double formatting round-trips") {
  for (double x : {0.0, -0.5, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) CHECK(parse_double(format_double(x), "t") == x);
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(-3.0) == "-3");
  CHECK_THROWS_AS(parse_double("1.5x", "t"), DataError);
  CHECK_THROWS_AS(parse_double("", "t"), DataError);
}

TEST_CASE("quaternion matrix text format") {
  Rng rng(5);
  const QMatrix q = qtest::random_qmatrix(rng, 3, 2);
  std::stringstream ss;
  write_qmatrix(ss, q);
  CHECK(ss.str().rfind("qmatrix 3 2\nR\n", 0) == 0);
  CHECK(read_qmatrix(ss) == q);

  std::stringstream complex_only;
  write_qmatrix(complex_only, q, 2);
  const QMatrix back = read_qmatrix(complex_only);
  CHECK(back.real() == q.real());
  CHECK(back.component(1) == q.component(1));
  CHECK(back.component(2).isZero(0.0));

  std::istringstream short_rows("qmatrix 2 2\nR\n1 2\n3\n");
  CHECK_THROWS_AS(read_qmatrix(short_rows), DataError);
  std::istringstream bad_header("matrix 2 2\n1 2\n3 4\n");
  CHECK_THROWS_AS(read_qmatrix(bad_header), DataError);
}

TEST_CASE("real matrix text format") {
  MatrixXd m(2, 3);
  m << 1, -2, 0.25, 4, 5, 6;
  std::stringstream ss;
  write_matrix(ss, m);
  CHECK(read_matrix(ss) == m);
}

TEST_CASE("atomic writes") {
  const auto dir = std::filesystem::temp_directory_path() / "qlap_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  CHECK(read_file(path) == "second\n");
  for (const auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().filename() == "out.txt");
  std::filesystem::remove_all(dir);
  CHECK_THROWS_WITH_AS(read_file(path), doctest::Contains("out.txt"), DataError);
}
