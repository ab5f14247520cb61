#pragma once

#include <iosfwd>
#include <string>

#include "levreg/sparse_matrix.hpp"

namespace levreg {

/// Coordinate real general only. Duplicate entries are summed.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market_file(const std::string& path);
void write_matrix_market(std::ostream& out, const SparseMatrix& a);

/// One decimal per line; blank lines are skipped.
Vector read_vector(std::istream& in);
Vector read_vector_file(const std::string& path);
void write_vector(std::ostream& out, const Vector& v);

}  // namespace levreg
