#pragma once

// Line-oriented text formats for dense matrices.
//
//   qmatrix <rows> <cols>
//   R
//   <rows lines of cols values>
//   I
//   ...
//   J
//   ...
//   K
//   ...
//
// Values use shortest round-trip formatting. Complex matrices are written with
// the R and I blocks only, real ones with R only; absent blocks read as zero.
// A plain real matrix uses the header `matrix <rows> <cols>` and no labels.

#include "qlap/quaternion.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace qlap {

/// Malformed or inconsistent input data (files, edge lists, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v);
double parse_double(const std::string& token, const std::string& context);

/// Number of components written: 1 (real), 2 (complex) or 4 (quaternion).
void write_qmatrix(std::ostream& os, const QMatrix& q, int components = 4);
QMatrix read_qmatrix(std::istream& is);

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is);

/// Writes to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace qlap
