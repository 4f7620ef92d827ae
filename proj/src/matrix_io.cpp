#include "qlap/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace qlap {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0 into 0 so files stay canonical
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double v = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw DataError(context + ": cannot parse number '" + token + "'");
  return v;
}

namespace {

const char kLabels[4] = {'R', 'I', 'J', 'K'};

void write_block(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

bool next_content_line(std::istream& is, std::string& line, int& lineno) {
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

void read_block(std::istream& is, Eigen::MatrixXd& m, int& lineno) {
  std::string line;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (!next_content_line(is, line, lineno))
      throw DataError("matrix: unexpected end of input at line " + std::to_string(lineno));
    std::istringstream ls(line);
    std::string tok;
    Eigen::Index c = 0;
    while (ls >> tok) {
      if (c >= m.cols())
        throw DataError("matrix: too many values on line " + std::to_string(lineno));
      m(r, c++) = parse_double(tok, "line " + std::to_string(lineno));
    }
    if (c != m.cols()) throw DataError("matrix: too few values on line " + std::to_string(lineno));
  }
}

std::pair<Eigen::Index, Eigen::Index> read_header(std::istream& is, const std::string& tag,
                                                  int& lineno) {
  std::string line;
  if (!next_content_line(is, line, lineno)) throw DataError(tag + ": empty input");
  std::istringstream hs(line);
  std::string word;
  long long rows = -1, cols = -1;
  if (!(hs >> word >> rows >> cols) || word != tag || rows < 0 || cols < 0)
    throw DataError(tag + ": bad header '" + line + "'");
  return {rows, cols};
}

}  // namespace

void write_qmatrix(std::ostream& os, const QMatrix& q, int components) {
  if (components != 1 && components != 2 && components != 4)
    throw std::invalid_argument("write_qmatrix: components must be 1, 2 or 4");
  os << "qmatrix " << q.rows() << ' ' << q.cols() << '\n';
  for (int c = 0; c < components; ++c) {
    os << kLabels[c] << '\n';
    write_block(os, q.component(c));
  }
}

QMatrix read_qmatrix(std::istream& is) {
  int lineno = 0;
  auto [rows, cols] = read_header(is, "qmatrix", lineno);
  QMatrix q(rows, cols);
  std::string line;
  int expected = 0;
  while (next_content_line(is, line, lineno)) {
    if (line.size() != 1 || expected >= 4 || line[0] != kLabels[expected])
      throw DataError("qmatrix: expected block label '" + std::string(1, kLabels[std::min(expected, 3)]) +
                      "' at line " + std::to_string(lineno));
    read_block(is, q.component(expected), lineno);
    ++expected;
  }
  if (expected == 0) throw DataError("qmatrix: no blocks");
  return q;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << "matrix " << m.rows() << ' ' << m.cols() << '\n';
  write_block(os, m);
}

Eigen::MatrixXd read_matrix(std::istream& is) {
  int lineno = 0;
  auto [rows, cols] = read_header(is, "matrix", lineno);
  Eigen::MatrixXd m(rows, cols);
  read_block(is, m, lineno);
  return m;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp + "' for writing");
    out << contents;
    if (!out) throw DataError("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qlap
