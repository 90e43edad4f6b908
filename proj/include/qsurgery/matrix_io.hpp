#pragma once

#include "qsurgery/bitmatrix.hpp"

#include <iosfwd>
#include <string>

namespace qsurgery {

/// Text format for GF(2) matrices: a header line "rows cols" followed by one
/// "r c" line per nonzero entry (0-based). Blank lines and lines starting
/// with '#' are ignored on input; output is canonical (row-major sorted).
BitMatrix read_matrix_text(std::istream& in);
BitMatrix read_matrix_file(const std::string& path);
void write_matrix_text(std::ostream& out, const BitMatrix& m);
void write_matrix_file(const std::string& path, const BitMatrix& m);

} // namespace qsurgery
