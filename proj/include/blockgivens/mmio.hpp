#pragma once

// Matrix Market coordinate files.
//
// Reading accepts `matrix coordinate {real,integer,pattern} {general,symmetric}`;
// symmetric files are expanded to both triangles. Writing always produces
// `coordinate real general` with entries sorted by (row, column) and values
// printed with 17 significant digits, so read -> write -> read is exact.

#include <iosfwd>
#include <string>

#include <Eigen/Sparse>

#include "blockgivens/matrix.hpp"

namespace blockgivens {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Parse error carrying the 1-based line number of the offending line.
class mm_parse_error : public invalid_input {
public:
  mm_parse_error(const std::string& what, long line)
      : invalid_input("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

private:
  long line_;
};

SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::string& path);

void write_matrix_market(const SparseMatrix& M, std::ostream& out);
void write_matrix_market(const SparseMatrix& M, const std::string& path);
void write_matrix_market(const Matrix& M, const std::string& path);

}  // namespace blockgivens
